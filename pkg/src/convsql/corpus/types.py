"""Core data model: utterances, queries, interactions, the flight database."""

from __future__ import annotations

import datetime as dt
import json
import re
from dataclasses import dataclass, field


class CorpusError(ValueError):
    """Invalid corpus data or corpus file contents."""


_TRAILING_PUNCT = re.compile(r"^(.*?)([.,?!;:]+)$")


def tokenize_utterance(raw_text: str) -> tuple[str, ...]:
    """Lowercase, split on whitespace, split trailing punctuation into its own tokens."""
    out: list[str] = []
    for piece in raw_text.lower().split():
        trailing: list[str] = []
        m = _TRAILING_PUNCT.match(piece)
        while m and m.group(1):
            piece = m.group(1)
            trailing = list(m.group(2)) + trailing
            m = _TRAILING_PUNCT.match(piece)
        out.append(piece)
        out.extend(trailing)
    return tuple(out)


@dataclass(frozen=True)
class Utterance:
    tokens: tuple[str, ...]
    raw_text: str

    def __post_init__(self) -> None:
        if not self.tokens:
            raise CorpusError("utterance has no tokens")
        for tok in self.tokens:
            if not tok or any(ch.isspace() for ch in tok):
                raise CorpusError(f"bad utterance token {tok!r}")

    @classmethod
    def from_text(cls, raw_text: str) -> Utterance:
        return cls(tokens=tokenize_utterance(raw_text), raw_text=raw_text)


@dataclass(frozen=True)
class Query:
    """A gold SQL token sequence, plus alternative gold forms when the utterance is ambiguous."""

    tokens: tuple[str, ...]
    alternatives: tuple[tuple[str, ...], ...] = ()

    def __post_init__(self) -> None:
        if not self.tokens:
            raise CorpusError("query has no tokens")

    def all_golds(self) -> tuple[tuple[str, ...], ...]:
        return (self.tokens,) + self.alternatives

    def shortest_gold(self) -> tuple[str, ...]:
        return min(self.all_golds(), key=len)


@dataclass(frozen=True)
class Interaction:
    id: str
    scenario_id: str
    document_date: dt.date
    turns: tuple[tuple[Utterance, Query], ...]

    def __post_init__(self) -> None:
        if not self.turns:
            raise CorpusError(f"interaction {self.id!r} has no turns")

    def __len__(self) -> int:
        return len(self.turns)

    def turn(self, i: int) -> tuple[Utterance, Query]:
        """Turn lookup by 1-based index."""
        if not 1 <= i <= len(self.turns):
            raise IndexError(f"turn index {i} out of range 1..{len(self.turns)}")
        return self.turns[i - 1]


@dataclass(frozen=True)
class EntityColumn:
    table: str
    column: str
    entity_type: str


@dataclass
class Database:
    """In-memory relational tables with typed columns.

    ``schema`` maps table name to an ordered list of (column, type) pairs with
    type in {"int", "text"}. ``entity_columns`` marks columns whose values are
    nameable entities usable for anonymization.
    """

    schema: dict[str, list[tuple[str, str]]]
    rows: dict[str, list[tuple]]
    entity_columns: list[EntityColumn] = field(default_factory=list)

    def __post_init__(self) -> None:
        for table in self.rows:
            if table not in self.schema:
                raise CorpusError(f"rows for unknown table {table!r}")
        for ec in self.entity_columns:
            vals = self.column_values(ec.table, ec.column)
            if len(set(vals)) != len(vals):
                raise CorpusError(f"entity column {ec.table}.{ec.column} has duplicate values")

    def has_table(self, table: str) -> bool:
        return table in self.schema

    def columns(self, table: str) -> list[str]:
        return [c for c, _ in self.schema[table]]

    def _column_cache(self) -> dict:
        cache = getattr(self, "_columns", None)
        if cache is None:
            cache = {
                (table, name): (i, ctype)
                for table, cols in self.schema.items()
                for i, (name, ctype) in enumerate(cols)
            }
            object.__setattr__(self, "_columns", cache)
        return cache

    def column_index(self, table: str, column: str) -> int:
        entry = self._column_cache().get((table, column))
        if entry is None:
            raise CorpusError(f"unknown column {table}.{column}")
        return entry[0]

    def column_type(self, table: str, column: str) -> str:
        entry = self._column_cache().get((table, column))
        if entry is None:
            raise CorpusError(f"unknown column {table}.{column}")
        return entry[1]

    def column_values(self, table: str, column: str) -> list:
        idx = self.column_index(table, column)
        return [row[idx] for row in self.rows.get(table, [])]

    def to_json_dict(self) -> dict:
        return {
            "tables": {
                name: {
                    "columns": [{"name": c, "type": t} for c, t in cols],
                    "rows": [list(r) for r in self.rows.get(name, [])],
                }
                for name, cols in self.schema.items()
            },
            "entity_columns": [
                {"table": ec.table, "column": ec.column, "entity_type": ec.entity_type}
                for ec in self.entity_columns
            ],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> Database:
        try:
            schema = {
                name: [(c["name"], c["type"]) for c in spec["columns"]]
                for name, spec in doc["tables"].items()
            }
            rows = {name: [tuple(r) for r in spec["rows"]] for name, spec in doc["tables"].items()}
            entity_columns = [
                EntityColumn(e["table"], e["column"], e["entity_type"])
                for e in doc.get("entity_columns", [])
            ]
        except (KeyError, TypeError) as exc:
            raise CorpusError(f"malformed database document: {exc}") from exc
        return cls(schema=schema, rows=rows, entity_columns=entity_columns)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=1)

    @classmethod
    def load(cls, path) -> Database:
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


PHENOMENA = (
    "constraint-add",
    "constraint-replace",
    "target-change",
    "focus-change",
    "explicit-reference",
)


@dataclass(frozen=True)
class CorpusSpec:
    """Parameters for the synthetic interaction generator."""

    n_interactions: int
    turn_length_distribution: dict = field(
        default_factory=lambda: {"mean": 7.0, "max": 16}
    )
    phenomenon_weights: dict = field(
        default_factory=lambda: {
            "constraint-add": 0.45,
            "constraint-replace": 0.2,
            "target-change": 0.15,
            "focus-change": 0.08,
            "explicit-reference": 0.12,
        }
    )
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_interactions < 0:
            raise CorpusError("n_interactions must be >= 0")
        if set(self.phenomenon_weights) - set(PHENOMENA):
            raise CorpusError(f"unknown phenomena: {set(self.phenomenon_weights) - set(PHENOMENA)}")
        total = sum(self.phenomenon_weights.values())
        if abs(total - 1.0) > 1e-9:
            raise CorpusError(f"phenomenon_weights sum to {total}, expected 1")
        if self.turn_length_distribution.get("mean", 0) <= 0:
            raise CorpusError("turn_length_distribution.mean must be positive")
