"""Interaction data model, synthetic corpus generation, splits, statistics."""

from .jsonl import interaction_to_record, load_interactions, save_interactions
from .split import split_by_scenario
from .stats import corpus_statistics
from .synth import build_flight_database, generate_synthetic_corpus
from .types import (
    PHENOMENA,
    CorpusError,
    CorpusSpec,
    Database,
    EntityColumn,
    Interaction,
    Query,
    Utterance,
    tokenize_utterance,
)

__all__ = [
    "PHENOMENA",
    "CorpusError",
    "CorpusSpec",
    "Database",
    "EntityColumn",
    "Interaction",
    "Query",
    "Utterance",
    "build_flight_database",
    "corpus_statistics",
    "generate_synthetic_corpus",
    "interaction_to_record",
    "load_interactions",
    "save_interactions",
    "split_by_scenario",
    "tokenize_utterance",
]
