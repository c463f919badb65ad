"""Independent oracles used to check the production implementations."""

from __future__ import annotations

from convsql.sqlkit.parser import NodeKind, SqlNode, parse_sql


def enumerate_extractable_spans(tokens) -> set[tuple[int, int]]:
    """Brute-force oracle: enumerate every subtree of the parse with its ancestor
    chain, and keep the spans the extraction rules admit (conditions, IN
    nestings, and AND lists below a WHERE; SELECTs carrying MIN or MAX)."""
    tree = parse_sql(list(tokens))
    all_nodes: list[tuple[SqlNode, tuple[SqlNode, ...]]] = []

    def collect(node: SqlNode, ancestors: tuple[SqlNode, ...]) -> None:
        all_nodes.append((node, ancestors))
        for child in node.children:
            collect(child, ancestors + (node,))

    collect(tree, ())

    spans: set[tuple[int, int]] = set()
    for node, ancestors in all_nodes:
        below_where = any(a.kind is NodeKind.WHERE for a in ancestors)
        if below_where and node.kind in (
            NodeKind.AND_LIST,
            NodeKind.CONDITION,
            NodeKind.IN_SUBQUERY,
        ):
            spans.add(node.span)
        if node.kind is NodeKind.SELECT:
            has_minmax = any(
                c.kind is NodeKind.AGGREGATE and c.value in ("MIN", "MAX")
                for c in node.children
            )
            if has_minmax:
                spans.add(node.span)
    return spans


def oracle_segment_token_sets(tokens) -> dict[tuple[str, ...], tuple[int, int]]:
    """Deduplicate oracle spans by token sequence, keeping the leftmost span."""
    out: dict[tuple[str, ...], tuple[int, int]] = {}
    for start, end in sorted(enumerate_extractable_spans(tokens)):
        seq = tuple(tokens[start:end])
        if seq not in out:
            out[seq] = (start, end)
    return out


def count_parens_balance(tokens) -> int:
    open_count = sum(1 for t in tokens if t == "(")
    close_count = sum(1 for t in tokens if t == ")")
    return open_count - close_count
