"""Execution-based evaluation: query accuracy plus denotation metrics."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..corpus.types import Database, Interaction
from ..neural.config import ModelConfig
from ..neural.params import ModelParameters
from ..preprocess.dictionary import EntityDictionary
from ..sqlkit.executor import compare_tables, execute
from .session import PredictionRecord, predict_interaction

TURN_BUCKET_CAP = 20  # later turns pool into one final bucket


class MetricLatticeError(AssertionError):
    """A prediction broke query-match => strict => relaxed."""


@dataclass
class MetricsReport:
    query_accuracy: float
    relaxed_denotation: float
    strict_denotation: float
    n_utterances: int
    n_interactions: int
    per_turn_strict: dict[int, float]
    per_turn_counts: dict[int, int]
    mode: str
    per_interaction: list[dict] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "query_accuracy": self.query_accuracy,
            "relaxed_denotation": self.relaxed_denotation,
            "strict_denotation": self.strict_denotation,
            "n_utterances": self.n_utterances,
            "n_interactions": self.n_interactions,
            "per_turn_strict": {str(k): v for k, v in sorted(self.per_turn_strict.items())},
            "per_turn_counts": {str(k): v for k, v in sorted(self.per_turn_counts.items())},
            "mode": self.mode,
            "per_interaction": self.per_interaction,
        }


def score_prediction(
    predicted_tokens: list[str],
    golds: tuple[tuple[str, ...], ...],
    database: Database,
) -> tuple[bool, bool, bool]:
    """(query_match, strict, relaxed) against any gold alternative."""
    query_match = any(tuple(predicted_tokens) == tuple(g) for g in golds)
    predicted_table = execute(predicted_tokens, database)
    gold_tables = [execute(list(g), database) for g in golds]
    strict = compare_tables(predicted_table, gold_tables, "strict")
    relaxed = compare_tables(predicted_table, gold_tables, "relaxed")
    if query_match and not strict:
        raise MetricLatticeError(
            f"query match without strict denotation match: {' '.join(predicted_tokens)}"
        )
    if strict and not relaxed:
        raise MetricLatticeError("strict held but relaxed did not")
    return query_match, strict, relaxed


def evaluate(
    interactions: list[Interaction],
    config: ModelConfig,
    params: ModelParameters,
    dictionary: EntityDictionary,
    database: Database,
    mode: str = "predicted",
    max_tokens: int = 300,
) -> MetricsReport:
    """Predict every interaction and score each turn against the gold queries."""
    n = 0
    q_hits = strict_hits = relaxed_hits = 0
    bucket_hits: dict[int, int] = {}
    bucket_counts: dict[int, int] = {}
    per_interaction = []
    for interaction in interactions:
        records = predict_interaction(
            config, params, dictionary, interaction,
            previous_query_mode=mode, max_tokens=max_tokens, database=database,
        )
        turn_docs = []
        for record, (utterance, query) in zip(records, interaction.turns):
            q, s, r = score_prediction(record.query_tokens, query.all_golds(), database)
            n += 1
            q_hits += q
            strict_hits += s
            relaxed_hits += r
            bucket = min(record.turn_index, TURN_BUCKET_CAP)
            bucket_counts[bucket] = bucket_counts.get(bucket, 0) + 1
            bucket_hits[bucket] = bucket_hits.get(bucket, 0) + s
            turn_docs.append(
                {
                    "turn": record.turn_index,
                    "predicted": " ".join(record.query_tokens),
                    "query_match": q,
                    "strict": s,
                    "relaxed": r,
                }
            )
        per_interaction.append({"id": interaction.id, "turns": turn_docs})
    return MetricsReport(
        query_accuracy=q_hits / max(n, 1),
        relaxed_denotation=relaxed_hits / max(n, 1),
        strict_denotation=strict_hits / max(n, 1),
        n_utterances=n,
        n_interactions=len(interactions),
        per_turn_strict={
            b: bucket_hits[b] / bucket_counts[b] for b in bucket_counts
        },
        per_turn_counts=bucket_counts,
        mode=mode,
        per_interaction=per_interaction,
    )
