"""Shared vocabulary of anonymized placeholder tokens (e.g. CITY#1)."""

from __future__ import annotations

import re

TEXT_TYPES = ("CITY", "AIRPORT", "AIRLINE", "DAY_NAME")
NUMERIC_TYPES = ("NUM", "TIME", "DAY", "MONTH", "YEAR")
ANON_TYPES = TEXT_TYPES + NUMERIC_TYPES

_PLACEHOLDER = re.compile(r"^([A-Z_]+)#([0-9]+)$")
_SEGMENT_REF = re.compile(r"^SEGMENT#([0-9]+)$")


def make_placeholder(anon_type: str, index: int) -> str:
    return f"{anon_type}#{index}"


def split_placeholder(token: str) -> tuple[str, int] | None:
    """Return (type, index) when the token is an anonymized placeholder."""
    m = _PLACEHOLDER.match(token)
    if not m or m.group(1) not in ANON_TYPES:
        return None
    return m.group(1), int(m.group(2))


def is_placeholder(token: str) -> bool:
    return split_placeholder(token) is not None


def placeholder_is_numeric(token: str) -> bool:
    parts = split_placeholder(token)
    return parts is not None and parts[0] in NUMERIC_TYPES


def make_segment_ref(index: int) -> str:
    """Reference token standing for the index-th segment (1-based) of a segment set."""
    return f"SEGMENT#{index}"


def split_segment_ref(token: str) -> int | None:
    m = _SEGMENT_REF.match(token)
    return int(m.group(1)) if m else None
