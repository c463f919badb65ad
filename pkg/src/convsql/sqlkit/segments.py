"""Extraction of copyable segments from previous queries and gold alignment.

A segment is a contiguous token span of a previous query corresponding to a
parse subtree: any condition, IN-nesting, or AND list under a WHERE clause
(children of conjunctions are split into distinct segments), plus any SELECT
statement carrying a MIN or MAX aggregate. Segments are addressed as
(a, b, l, r): first and most recent query indices containing the segment, and
1-based inclusive token endpoints within query b.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..placeholders import make_segment_ref, split_segment_ref
from .parser import NodeKind, SqlNode, SqlParseError, parse_sql

EXTRACTABLE_KINDS = (NodeKind.AND_LIST, NodeKind.CONDITION, NodeKind.IN_SUBQUERY)


@dataclass(frozen=True)
class Segment:
    a: int
    b: int
    l: int
    r: int
    tokens: tuple[str, ...]

    def __post_init__(self) -> None:
        if not (1 <= self.a <= self.b):
            raise ValueError(f"segment indices out of order: a={self.a}, b={self.b}")
        if not (1 <= self.l <= self.r):
            raise ValueError(f"segment span out of order: l={self.l}, r={self.r}")
        if len(self.tokens) != self.r - self.l + 1:
            raise ValueError("segment tokens do not match span width")
        if any(split_segment_ref(t) is not None for t in self.tokens):
            raise ValueError("segments never nest")


@dataclass(frozen=True)
class SegmentSet:
    """Ordered copyable segments available when generating the query of ``turn_index``."""

    turn_index: int
    segments: tuple[Segment, ...] = ()

    def __post_init__(self) -> None:
        bs = {s.b for s in self.segments}
        if len(bs) > 1:
            raise ValueError("all segments in a set must share the source query index b")

    def __len__(self) -> int:
        return len(self.segments)

    def __iter__(self):
        return iter(self.segments)

    def __getitem__(self, k: int) -> Segment:
        return self.segments[k]


def _where_subtree_spans(tree: SqlNode) -> list[tuple[int, int]]:
    """Spans of all extractable subtrees under any WHERE clause, in pre-order."""
    spans: list[tuple[int, int]] = []

    def visit(node: SqlNode, under_where: bool) -> None:
        if under_where and node.kind in EXTRACTABLE_KINDS:
            spans.append(node.span)
        for child in node.children:
            visit(child, under_where or node.kind is NodeKind.WHERE)

    visit(tree, False)
    return spans


def _minmax_select_spans(tree: SqlNode) -> list[tuple[int, int]]:
    spans = []
    for node in tree.walk():
        if node.kind is NodeKind.SELECT and any(
            c.kind is NodeKind.AGGREGATE and c.value in ("MIN", "MAX") for c in node.children
        ):
            spans.append(node.span)
    return spans


def segment_spans(tree: SqlNode) -> list[tuple[int, int]]:
    """All extractable spans of one parsed query, deduplicated by token position."""
    spans = _where_subtree_spans(tree) + _minmax_select_spans(tree)
    seen = set()
    out = []
    for span in spans:
        if span not in seen:
            seen.add(span)
            out.append(span)
    return out


def extract_segments(
    previous_queries,
    prior_sets: list[SegmentSet] | None = None,
    schema_check=None,
) -> SegmentSet:
    """Build the segment set available at turn ``len(previous_queries) + 1``.

    ``previous_queries`` holds the token sequences of queries 1..i-1 (gold at
    training time, predictions at inference). Segments come from the most
    recent query that parses (and passes ``schema_check`` when given), walking
    backwards; with no usable query the set is empty. The first-appearance
    index ``a`` is resolved by exact token-sequence identity against
    ``prior_sets``.
    """
    prior_sets = prior_sets or []
    turn_index = len(previous_queries) + 1
    earliest: dict[tuple[str, ...], int] = {}
    for prior in prior_sets:
        for seg in prior:
            if seg.tokens not in earliest or seg.a < earliest[seg.tokens]:
                earliest[seg.tokens] = seg.a

    for b in range(len(previous_queries), 0, -1):
        tokens = list(previous_queries[b - 1])
        try:
            tree = parse_sql(tokens)
        except SqlParseError:
            continue
        if schema_check is not None and not schema_check(tree):
            continue
        segments = []
        seen_tokens = set()
        for start, end in segment_spans(tree):
            seg_tokens = tuple(tokens[start:end])
            if seg_tokens in seen_tokens:
                continue
            seen_tokens.add(seg_tokens)
            segments.append(
                Segment(
                    a=earliest.get(seg_tokens, b),
                    b=b,
                    l=start + 1,
                    r=end,
                    tokens=seg_tokens,
                )
            )
        return SegmentSet(turn_index=turn_index, segments=tuple(segments))
    return SegmentSet(turn_index=turn_index)


def align_gold_with_segments(
    gold_tokens,
    segments: SegmentSet,
    current_utterance_entities=frozenset(),
) -> list[str]:
    """Rewrite a gold query, replacing copied spans with segment references.

    Longest segments are substituted first; every non-overlapping occurrence is
    replaced by a single ``SEGMENT#k`` token (k = 1-based position in the set),
    unless the segment mentions an entity from the current utterance, which
    must be generated explicitly. Replaced regions are opaque to later
    substitutions.
    """
    entities = set(current_utterance_entities)
    aligned: list[str | int] = list(gold_tokens)  # int marks a reference by set position
    order = sorted(range(len(segments)), key=lambda k: -len(segments[k].tokens))
    for k in order:
        seg = segments[k].tokens
        if entities and any(tok in entities for tok in seg):
            continue
        i = 0
        while i + len(seg) <= len(aligned):
            window = aligned[i : i + len(seg)]
            if all(isinstance(t, str) for t in window) and tuple(window) == seg:
                aligned[i : i + len(seg)] = [k]
                i += 1
            else:
                i += 1
    return [make_segment_ref(t + 1) if isinstance(t, int) else t for t in aligned]


def expand_segment_refs(aligned_tokens, segments: SegmentSet) -> list[str]:
    """Inverse of alignment: expand every reference back to its segment tokens."""
    out: list[str] = []
    for tok in aligned_tokens:
        ref = split_segment_ref(tok)
        if ref is None:
            out.append(tok)
        else:
            out.extend(segments[ref - 1].tokens)
    return out
