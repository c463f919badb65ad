"""Evaluator for the SQL subset against the in-memory database."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..corpus.types import Database
from ..placeholders import is_placeholder, placeholder_is_numeric
from .parser import NodeKind, SqlNode, SqlParseError, parse_sql
from .tokenizer import SqlTokenizeError


@dataclass(frozen=True)
class ResultTable:
    columns: tuple[str, ...] = ()
    rows: tuple[tuple, ...] = ()
    execution_failed: bool = False

    def __post_init__(self) -> None:
        if self.execution_failed and self.rows:
            raise ValueError("a failed execution carries no rows")


FAILED = ResultTable(execution_failed=True)


class _ExecError(Exception):
    pass


def _literal_value(node: SqlNode):
    tok = node.value
    if tok.startswith("'"):
        return tok[1:-1]
    return float(tok) if "." in tok else int(tok)


def _resolve_column(token: str, scope: dict[str, Database], db: Database) -> tuple[str, str]:
    if "." in token:
        table, column = token.split(".", 1)
        if table not in scope:
            raise _ExecError(f"table {table!r} not in scope")
    else:
        column = token
        hits = [t for t in scope if column in db.columns(t)]
        if len(hits) != 1:
            raise _ExecError(f"cannot resolve column {token!r}")
        table = hits[0]
    if column not in db.columns(table):
        raise _ExecError(f"unknown column {table}.{column}")
    return table, column


def _eval_select(node: SqlNode, db: Database, cache: dict | None = None) -> ResultTable:
    cache = cache if cache is not None else {}
    for table in node.tables:
        if not db.has_table(table):
            raise _ExecError(f"unknown table {table!r}")
    scope = {t: None for t in node.tables}

    where = next((c for c in node.children if c.kind is NodeKind.WHERE), None)
    if len(node.tables) == 1:
        # dominant case: stream rows through one reused environment
        table = node.tables[0]
        env = {table: None}
        env_rows = []
        for row in db.rows.get(table, []):
            env[table] = row
            if where is None or _eval_cond(where.children[0], env, scope, db, cache):
                env_rows.append({table: row})
    else:
        env_rows = [{}]
        for table in node.tables:
            env_rows = [
                {**env, table: row} for env in env_rows for row in db.rows.get(table, [])
            ]
        if where is not None:
            env_rows = [
                env for env in env_rows if _eval_cond(where.children[0], env, scope, db, cache)
            ]

    items = [c for c in node.children if c.kind in (NodeKind.COLUMN, NodeKind.AGGREGATE)]
    columns = []
    for item in items:
        columns.append(item.value if item.kind is NodeKind.COLUMN else f"{item.value}({item.children[0].value})")

    if any(item.kind is NodeKind.AGGREGATE for item in items):
        if not all(item.kind is NodeKind.AGGREGATE for item in items):
            raise _ExecError("mixed aggregate and plain columns are unsupported")
        row = tuple(_eval_aggregate(item, env_rows, scope, db, cache) for item in items)
        return ResultTable(columns=tuple(columns), rows=(row,))

    out_rows = []
    for env in env_rows:
        out_rows.append(tuple(_column_value(item.value, env, scope, db, cache) for item in items))
    if node.distinct:
        seen = set()
        deduped = []
        for row in out_rows:
            if row not in seen:
                seen.add(row)
                deduped.append(row)
        out_rows = deduped
    return ResultTable(columns=tuple(columns), rows=tuple(out_rows))


def _eval_aggregate(item: SqlNode, env_rows, scope, db: Database, cache: dict | None = None):
    values = [_column_value(item.children[0].value, env, scope, db, cache) for env in env_rows]
    if item.distinct:
        values = list(dict.fromkeys(values))
    if item.value == "COUNT":
        return len(values)
    if not values:
        return None
    return min(values) if item.value == "MIN" else max(values)


def _column_value(token: str, env: dict, scope, db: Database, cache: dict | None = None):
    key = ("col", token, tuple(scope))
    hit = cache.get(key) if cache is not None else None
    if hit is None:
        table, column = _resolve_column(token, scope, db)
        hit = (table, db.column_index(table, column))
        if cache is not None:
            cache[key] = hit
    return env[hit[0]][hit[1]]


def _eval_cond(node: SqlNode, env: dict, scope, db: Database, cache: dict) -> bool:
    if node.kind is NodeKind.AND_LIST:
        return all(_eval_cond(c, env, scope, db, cache) for c in node.children)
    if node.kind is NodeKind.CONDITION and node.value == "OR":
        return any(_eval_cond(c, env, scope, db, cache) for c in node.children)
    if node.kind is NodeKind.CONDITION:
        lhs = _column_value(node.children[0].value, env, scope, db, cache)
        rhs_node = node.children[1]
        if rhs_node.kind is NodeKind.PLACEHOLDER:
            raise _ExecError(f"unresolved placeholder {rhs_node.value!r}")
        if rhs_node.kind is NodeKind.COLUMN:
            rhs = _column_value(rhs_node.value, env, scope, db, cache)
        else:
            rhs = _literal_value(rhs_node)
        return _compare(node.value, lhs, rhs)
    if node.kind is NodeKind.IN_SUBQUERY:
        # Subqueries cannot reference the outer scope, so evaluate each once.
        lhs = _column_value(node.children[0].value, env, scope, db, cache)
        key = id(node)
        if key not in cache:
            sub = _eval_select(node.children[1], db, cache)
            cache[key] = {row[0] for row in sub.rows}
        return lhs in cache[key]
    raise _ExecError(f"cannot evaluate node kind {node.kind}")


def _compare(op: str, lhs, rhs) -> bool:
    numeric = isinstance(lhs, (int, float)) and isinstance(rhs, (int, float))
    if not numeric and not (isinstance(lhs, str) and isinstance(rhs, str)):
        raise _ExecError(f"type mismatch comparing {lhs!r} {op} {rhs!r}")
    if op == "=":
        return lhs == rhs
    if op == "<>":
        return lhs != rhs
    if op == "<":
        return lhs < rhs
    if op == ">":
        return lhs > rhs
    if op == "<=":
        return lhs <= rhs
    return lhs >= rhs


def execute(query_tokens, database: Database) -> ResultTable:
    """Run a query; syntactic or semantic failure yields execution_failed=True."""
    try:
        tree = parse_sql(list(query_tokens))
    except (SqlParseError, SqlTokenizeError):
        return FAILED
    try:
        return _eval_select(tree, database)
    except _ExecError:
        return FAILED


def follows_schema(tree: SqlNode, database: Database) -> bool:
    """Check that every referenced table/column exists and comparisons are type-compatible."""
    try:
        _check_select(tree, database)
        return True
    except _ExecError:
        return False


def _check_select(node: SqlNode, db: Database) -> None:
    for table in node.tables:
        if not db.has_table(table):
            raise _ExecError(f"unknown table {table!r}")
    scope = {t: None for t in node.tables}
    for child in node.children:
        if child.kind in (NodeKind.COLUMN,):
            _resolve_column(child.value, scope, db)
        elif child.kind is NodeKind.AGGREGATE:
            _resolve_column(child.children[0].value, scope, db)
        elif child.kind is NodeKind.WHERE:
            _check_cond(child.children[0], scope, db)


def _check_cond(node: SqlNode, scope, db: Database) -> None:
    if node.kind is NodeKind.AND_LIST or (node.kind is NodeKind.CONDITION and node.value == "OR"):
        for c in node.children:
            _check_cond(c, scope, db)
        return
    if node.kind is NodeKind.CONDITION:
        table, column = _resolve_column(node.children[0].value, scope, db)
        col_numeric = db.column_type(table, column) == "int"
        rhs = node.children[1]
        if rhs.kind is NodeKind.COLUMN:
            rt, rc = _resolve_column(rhs.value, scope, db)
            rhs_numeric = db.column_type(rt, rc) == "int"
        elif rhs.kind is NodeKind.PLACEHOLDER:
            rhs_numeric = placeholder_is_numeric(rhs.value)
        else:
            rhs_numeric = not rhs.value.startswith("'")
        if col_numeric != rhs_numeric:
            raise _ExecError(f"type mismatch on {table}.{column}")
        return
    if node.kind is NodeKind.IN_SUBQUERY:
        _resolve_column(node.children[0].value, scope, db)
        _check_select(node.children[1], db)
        return
    raise _ExecError(f"unexpected node kind {node.kind}")


def compare_tables(predicted: ResultTable, references, mode: str = "strict") -> bool:
    """Table match against any reference: rows as a multiset, columns positional.

    In relaxed mode a prediction that failed to execute is credited when some
    reference executed to an empty table.
    """
    if mode not in ("strict", "relaxed"):
        raise ValueError(f"unknown comparison mode {mode!r}")
    refs = list(references)
    if predicted.execution_failed:
        return mode == "relaxed" and any(
            not ref.execution_failed and not ref.rows for ref in refs
        )
    pred_rows = sorted(map(_row_key, predicted.rows))
    for ref in refs:
        if ref.execution_failed:
            continue
        if len(ref.rows) == len(predicted.rows) and sorted(map(_row_key, ref.rows)) == pred_rows:
            return True
    return False


def _row_key(row: tuple) -> tuple:
    return tuple((type(v).__name__, v) for v in row)
