"""SQL subset tooling: tokenizer, parser, segment extraction, execution."""

from .executor import ResultTable, compare_tables, execute, follows_schema
from .parser import NodeKind, SqlNode, SqlParseError, parse_sql
from .segments import (
    Segment,
    SegmentSet,
    align_gold_with_segments,
    expand_segment_refs,
    extract_segments,
    segment_spans,
)
from .tokenizer import SqlTokenizeError, detokenize_sql, tokenize_sql

__all__ = [
    "NodeKind",
    "ResultTable",
    "Segment",
    "SegmentSet",
    "SqlNode",
    "SqlParseError",
    "SqlTokenizeError",
    "align_gold_with_segments",
    "compare_tables",
    "detokenize_sql",
    "execute",
    "expand_segment_refs",
    "extract_segments",
    "follows_schema",
    "parse_sql",
    "segment_spans",
    "tokenize_sql",
]
