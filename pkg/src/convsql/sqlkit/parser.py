"""Recursive-descent parser for the SQL subset.

Grammar (token level):

    query        := [ "(" ] select_stmt [ ")" ] [ ";" ]
    select_stmt  := SELECT [DISTINCT] item ("," item)* FROM name ("," name)* [WHERE cond]
    item         := aggregate | column
    aggregate    := (MIN|MAX|COUNT) "(" [DISTINCT] column ")"
    cond         := conjunct (AND conjunct)*          -- n-ary AND list
    conjunct     := primary (OR primary)*             -- OR at condition level
    primary      := "(" cond ")" | column IN "(" select_stmt ")" | column op value
    op           := "=" | "<" | ">" | "<=" | ">=" | "<>"
    value        := quoted literal | number | placeholder | column

A parenthesized condition parses to the inner node with its token span widened
to include the parentheses.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

from ..placeholders import is_placeholder
from .tokenizer import KEYWORDS

COMPARISON_OPS = ("=", "<", ">", "<=", ">=", "<>")
AGGREGATE_FUNCS = ("MIN", "MAX", "COUNT")


class NodeKind(Enum):
    SELECT = "SELECT"
    WHERE = "WHERE"
    AND_LIST = "AND_LIST"
    CONDITION = "CONDITION"
    IN_SUBQUERY = "IN_SUBQUERY"
    AGGREGATE = "AGGREGATE"
    COLUMN = "COLUMN"
    LITERAL = "LITERAL"
    PLACEHOLDER = "PLACEHOLDER"


@dataclass(frozen=True)
class SqlNode:
    """Parse-tree node; ``span`` is a half-open (start, end) over the source tokens."""

    kind: NodeKind
    span: tuple[int, int]
    children: tuple["SqlNode", ...] = ()
    value: str | None = None  # leaf token, comparison op, aggregate func, or "OR"
    distinct: bool = False
    tables: tuple[str, ...] = ()

    def width(self) -> int:
        return self.span[1] - self.span[0]

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()


class SqlParseError(ValueError):
    def __init__(self, message: str, index: int):
        super().__init__(f"{message} at token index {index}")
        self.index = index


class _Parser:
    def __init__(self, tokens: list[str]):
        self.toks = list(tokens)
        self.i = 0

    def peek(self) -> str | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self) -> str:
        if self.i >= len(self.toks):
            raise SqlParseError("unexpected end of input", self.i)
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, token: str) -> None:
        if self.peek() != token:
            raise SqlParseError(f"expected {token!r}, found {self.peek()!r}", self.i)
        self.i += 1

    def parse_query(self) -> SqlNode:
        if self.peek() == "(":
            self.expect("(")
            node = self.parse_select()
            self.expect(")")
        else:
            node = self.parse_select()
        if self.peek() == ";":
            self.i += 1
        if self.i != len(self.toks):
            raise SqlParseError(f"trailing token {self.peek()!r}", self.i)
        return node

    def parse_select(self) -> SqlNode:
        start = self.i
        self.expect("SELECT")
        distinct = False
        if self.peek() == "DISTINCT":
            distinct = True
            self.i += 1
        items = [self.parse_item()]
        while self.peek() == ",":
            self.i += 1
            items.append(self.parse_item())
        self.expect("FROM")
        tables = [self.parse_name()]
        while self.peek() == ",":
            self.i += 1
            tables.append(self.parse_name())
        children = list(items)
        if self.peek() == "WHERE":
            where_start = self.i
            self.i += 1
            cond = self.parse_cond()
            children.append(
                SqlNode(NodeKind.WHERE, (where_start, cond.span[1]), (cond,))
            )
        return SqlNode(
            NodeKind.SELECT,
            (start, self.i),
            tuple(children),
            distinct=distinct,
            tables=tuple(tables),
        )

    def parse_item(self) -> SqlNode:
        if self.peek() in AGGREGATE_FUNCS:
            start = self.i
            func = self.take()
            self.expect("(")
            distinct = False
            if self.peek() == "DISTINCT":
                distinct = True
                self.i += 1
            col = self.parse_column()
            self.expect(")")
            return SqlNode(
                NodeKind.AGGREGATE, (start, self.i), (col,), value=func, distinct=distinct
            )
        return self.parse_column()

    def parse_name(self) -> str:
        tok = self.peek()
        if tok is None or tok in KEYWORDS or not self._is_identifier(tok):
            raise SqlParseError(f"expected table name, found {tok!r}", self.i)
        return self.take()

    @staticmethod
    def _is_identifier(tok: str) -> bool:
        return bool(tok) and (tok[0].isalpha() or tok[0] == "_") and not is_placeholder(tok)

    def parse_column(self) -> SqlNode:
        tok = self.peek()
        if tok is None or tok in KEYWORDS or not self._is_identifier(tok):
            raise SqlParseError(f"expected column, found {tok!r}", self.i)
        start = self.i
        return SqlNode(NodeKind.COLUMN, (start, start + 1), value=self.take())

    def parse_cond(self) -> SqlNode:
        start_children = [self.parse_conjunct()]
        while self.peek() == "AND":
            self.i += 1
            start_children.append(self.parse_conjunct())
        if len(start_children) == 1:
            return start_children[0]
        return SqlNode(
            NodeKind.AND_LIST,
            (start_children[0].span[0], start_children[-1].span[1]),
            tuple(start_children),
        )

    def parse_conjunct(self) -> SqlNode:
        parts = [self.parse_primary()]
        while self.peek() == "OR":
            self.i += 1
            parts.append(self.parse_primary())
        if len(parts) == 1:
            return parts[0]
        return SqlNode(
            NodeKind.CONDITION,
            (parts[0].span[0], parts[-1].span[1]),
            tuple(parts),
            value="OR",
        )

    def parse_primary(self) -> SqlNode:
        if self.peek() == "(":
            start = self.i
            self.i += 1
            inner = self.parse_cond()
            self.expect(")")
            return replace(inner, span=(start, self.i))
        col = self.parse_column()
        tok = self.peek()
        if tok == "IN":
            self.i += 1
            self.expect("(")
            sub = self.parse_select()
            self.expect(")")
            return SqlNode(NodeKind.IN_SUBQUERY, (col.span[0], self.i), (col, sub))
        if tok in COMPARISON_OPS:
            op = self.take()
            rhs = self.parse_value()
            return SqlNode(
                NodeKind.CONDITION, (col.span[0], rhs.span[1]), (col, rhs), value=op
            )
        raise SqlParseError(f"expected comparison or IN, found {tok!r}", self.i)

    def parse_value(self) -> SqlNode:
        tok = self.peek()
        if tok is None:
            raise SqlParseError("expected value", self.i)
        start = self.i
        if tok.startswith("'") and tok.endswith("'") and len(tok) >= 2:
            return SqlNode(NodeKind.LITERAL, (start, start + 1), value=self.take())
        if _is_number(tok):
            return SqlNode(NodeKind.LITERAL, (start, start + 1), value=self.take())
        if is_placeholder(tok):
            return SqlNode(NodeKind.PLACEHOLDER, (start, start + 1), value=self.take())
        if self._is_identifier(tok) and tok not in KEYWORDS:
            return self.parse_column()
        raise SqlParseError(f"expected value, found {tok!r}", self.i)


def _is_number(tok: str) -> bool:
    try:
        float(tok)
        return True
    except ValueError:
        return False


def parse_sql(tokens) -> SqlNode:
    """Parse a token sequence (from :func:`tokenize_sql`) into a tree."""
    return _Parser(list(tokens)).parse_query()
