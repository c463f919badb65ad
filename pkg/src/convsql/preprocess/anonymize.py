"""Anonymization of entities, numbers, and dates, and its inversion.

Placeholder indices live in an interaction-scoped mapping: an entity seen
again anywhere in the interaction keeps its placeholder, and the mapping is a
bijection between placeholders and SQL literals.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

from ..corpus.types import Utterance
from ..placeholders import is_placeholder, make_placeholder
from .dates import resolve_dates, parse_time_token
from .dictionary import EntityDictionary

_DIGIT_WORDS = {
    "zero": "0",
    "one": "1",
    "two": "2",
    "three": "3",
    "four": "4",
    "five": "5",
    "six": "6",
    "seven": "7",
    "eight": "8",
    "nine": "9",
}


@dataclass
class AnonymizationMapping:
    """Ordered bijection placeholder -> SQL literal for one interaction."""

    entries: dict[str, str] = field(default_factory=dict)
    _by_literal: dict[str, str] = field(default_factory=dict)
    _counters: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for placeholder, literal in self.entries.items():
            self._by_literal.setdefault(literal, placeholder)
            anon_type, idx = placeholder.rsplit("#", 1)
            self._counters[anon_type] = max(self._counters.get(anon_type, 0), int(idx))
        if len(self._by_literal) != len(self.entries):
            raise ValueError("anonymization mapping must be injective")

    def __len__(self) -> int:
        return len(self.entries)

    def placeholder_for(self, literal: str, anon_type: str) -> str:
        """Existing placeholder of the literal, or a fresh indexed one of this type."""
        existing = self._by_literal.get(literal)
        if existing is not None:
            return existing
        index = self._counters.get(anon_type, 0) + 1
        placeholder = make_placeholder(anon_type, index)
        self._counters[anon_type] = index
        self.entries[placeholder] = literal
        self._by_literal[literal] = placeholder
        return placeholder

    def literal_for(self, placeholder: str) -> str | None:
        return self.entries.get(placeholder)

    def placeholder_of_literal(self, literal: str) -> str | None:
        return self._by_literal.get(literal)

    def copy(self) -> AnonymizationMapping:
        return AnonymizationMapping(entries=dict(self.entries))

    def to_json_dict(self) -> dict:
        return dict(self.entries)

    @classmethod
    def from_json_dict(cls, doc: dict) -> AnonymizationMapping:
        return cls(entries=dict(doc))


def collapse_spelled_numbers(tokens) -> list[str]:
    """Join runs of two or more spelled-out digits into one numeral token."""
    out: list[str] = []
    i = 0
    tokens = list(tokens)
    while i < len(tokens):
        j = i
        while j < len(tokens) and tokens[j] in _DIGIT_WORDS:
            j += 1
        if j - i >= 2:
            out.append("".join(_DIGIT_WORDS[t] for t in tokens[i:j]))
            i = j
        else:
            out.append(tokens[i])
            i += 1
    return out


def anonymize_utterance(
    utterance: Utterance,
    dictionary: EntityDictionary,
    document_date: dt.date,
    mapping: AnonymizationMapping,
) -> tuple[list[str], AnonymizationMapping]:
    """Replace entities, dates, times, and numbers with typed placeholders.

    Dictionary surface forms match longest-first left-to-right; date
    expressions become DAY/MONTH/YEAR placeholder triples; the mapping is
    updated in place and also returned.
    """
    tokens = collapse_spelled_numbers(utterance.tokens)
    date_spans = {r.source_span[0]: r for r in resolve_dates(tokens, document_date)}
    longest = dictionary.max_surface_len()
    out: list[str] = []
    i = 0
    while i < len(tokens):
        if i in date_spans:
            r = date_spans[i]
            out.append(mapping.placeholder_for(str(r.day), "DAY"))
            out.append(mapping.placeholder_for(str(r.month), "MONTH"))
            out.append(mapping.placeholder_for(str(r.year), "YEAR"))
            i = r.source_span[1]
            continue
        matched = False
        for width in range(min(longest, len(tokens) - i), 0, -1):
            hit = dictionary.lookup(tuple(tokens[i : i + width]))
            if hit is not None:
                literal, anon_type = hit
                out.append(mapping.placeholder_for(literal, anon_type))
                i += width
                matched = True
                break
        if matched:
            continue
        time_value = parse_time_token(tokens[i])
        if time_value is not None:
            out.append(mapping.placeholder_for(str(time_value), "TIME"))
        elif tokens[i].isdigit():
            out.append(mapping.placeholder_for(tokens[i], "NUM"))
        else:
            out.append(tokens[i])
        i += 1
    return out, mapping


def anonymize_query(query_tokens, mapping: AnonymizationMapping) -> list[str]:
    """Swap every mapped SQL literal for its placeholder; other tokens pass through."""
    return [mapping.placeholder_of_literal(tok) or tok for tok in query_tokens]


def deanonymize(tokens, mapping: AnonymizationMapping) -> list[str]:
    """Inverse substitution; unmapped placeholders stay verbatim (a model error,
    carried forward so evaluation can count it)."""
    out = []
    for tok in tokens:
        literal = mapping.literal_for(tok) if is_placeholder(tok) else None
        out.append(literal if literal is not None else tok)
    return out


def fix_parentheses(tokens) -> list[str]:
    """Append one closing parenthesis per unmatched opening one."""
    tokens = list(tokens)
    opens = tokens.count("(")
    closes = tokens.count(")")
    return tokens + [")"] * max(0, opens - closes)
