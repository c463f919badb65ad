"""Entity dictionary: natural-language surface forms to SQL literals."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..corpus.types import Database

DEFAULT_TYPE_PRIORITY = ("CITY", "AIRPORT", "AIRLINE")


class EntityCollisionError(ValueError):
    pass


@dataclass
class EntityDictionary:
    """Maps lowercase surface token tuples to (sql_literal, entity_type)."""

    entries: dict[tuple[str, ...], tuple[str, str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for surface in self.entries:
            if not surface or any(not tok for tok in surface):
                raise ValueError(f"bad surface form {surface!r}")

    def __len__(self) -> int:
        return len(self.entries)

    def max_surface_len(self) -> int:
        return max((len(s) for s in self.entries), default=0)

    def lookup(self, surface: tuple[str, ...]) -> tuple[str, str] | None:
        return self.entries.get(surface)

    def to_json_dict(self) -> dict:
        return {
            "entries": [
                {"surface": " ".join(surface), "literal": literal, "type": etype}
                for surface, (literal, etype) in sorted(self.entries.items())
            ]
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> EntityDictionary:
        entries = {
            tuple(e["surface"].split()): (e["literal"], e["type"]) for e in doc["entries"]
        }
        return cls(entries=entries)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=1)

    @classmethod
    def load(cls, path) -> EntityDictionary:
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


def build_entity_dictionary(
    database: Database,
    type_priority: tuple[str, ...] | None = None,
) -> EntityDictionary:
    """Collect every entity-column value as a surface form mapping to its quoted literal.

    A surface claimed by two different (literal, type) targets is a collision:
    with no ``type_priority`` it raises, otherwise the higher-priority type
    wins (unlisted types rank below listed ones, ties break alphabetically).
    """
    entries: dict[tuple[str, ...], tuple[str, str]] = {}

    def rank(etype: str) -> tuple[int, str]:
        if type_priority and etype in type_priority:
            return (type_priority.index(etype), etype)
        return (len(type_priority or ()), etype)

    for ec in database.entity_columns:
        for value in database.column_values(ec.table, ec.column):
            surface = tuple(str(value).lower().split())
            target = (f"'{value}'", ec.entity_type)
            existing = entries.get(surface)
            if existing is None or existing == target:
                entries[surface] = target
            elif type_priority is None:
                raise EntityCollisionError(
                    f"surface {' '.join(surface)!r} maps to both {existing} and {target}; "
                    "pass a type priority to disambiguate"
                )
            elif rank(target[1]) < rank(existing[1]):
                entries[surface] = target
    return EntityDictionary(entries=entries)
