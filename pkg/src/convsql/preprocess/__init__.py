"""Entity/date anonymization and query post-processing."""

from .anonymize import (
    AnonymizationMapping,
    anonymize_query,
    anonymize_utterance,
    collapse_spelled_numbers,
    deanonymize,
    fix_parentheses,
)
from .dates import MONTHS, WEEKDAYS, ResolvedDate, parse_time_token, resolve_dates
from .dictionary import (
    DEFAULT_TYPE_PRIORITY,
    EntityCollisionError,
    EntityDictionary,
    build_entity_dictionary,
)

__all__ = [
    "AnonymizationMapping",
    "DEFAULT_TYPE_PRIORITY",
    "EntityCollisionError",
    "EntityDictionary",
    "MONTHS",
    "ResolvedDate",
    "WEEKDAYS",
    "anonymize_query",
    "anonymize_utterance",
    "build_entity_dictionary",
    "collapse_spelled_numbers",
    "deanonymize",
    "fix_parentheses",
    "parse_time_token",
    "resolve_dates",
]
