"""Interaction-level greedy inference with live session state."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..corpus.types import Database, Utterance
from ..neural import net
from ..neural.config import ModelConfig
from ..neural.net import DiscourseState, EncodedUtterance
from ..neural.params import ModelParameters
from ..neural.runtime import greedy_decode, prepare_turn
from ..placeholders import is_placeholder
from ..preprocess.anonymize import (
    AnonymizationMapping,
    anonymize_query,
    anonymize_utterance,
    deanonymize,
    fix_parentheses,
)
from ..preprocess.dictionary import EntityDictionary
from ..sqlkit.executor import follows_schema
from ..sqlkit.parser import SqlParseError, parse_sql
from ..sqlkit.segments import SegmentSet, extract_segments
import datetime as dt


@dataclass
class PredictionRecord:
    """Everything produced while predicting one turn."""

    turn_index: int
    utterance_tokens: list[str]
    anonymized_utterance: list[str]
    decisions: list  # token strings and segment set positions
    anonymized_query: list[str]
    query_tokens: list[str]  # post-processed, de-anonymized
    attention: np.ndarray  # (steps, attendable rows)
    attended_tokens: list[tuple[int, str]]  # (turn, token) per attention column
    segments_used: list[dict]  # {a, b, l, r, text}
    segments_available: int
    segment_source_turn: int | None  # b of the extracted set, when non-empty
    provenance: list[tuple[int, int, int | None]]  # spans over query_tokens
    anonymization_added: list[tuple[str, str]]  # placeholders minted this turn
    n_generated: int  # expanded tokens emitted by the decoder, before repair
    ended: bool


@dataclass
class InferenceSessionState:
    """Carries everything predict_turn maintains across turns."""

    config: ModelConfig
    params: ModelParameters
    dictionary: EntityDictionary
    document_date: dt.date
    mapping: AnonymizationMapping = field(default_factory=AnonymizationMapping)
    discourse: DiscourseState | None = None
    encoded_history: list[EncodedUtterance] = field(default_factory=list)
    history_tokens: list[list[str]] = field(default_factory=list)
    previous_queries: list[list[str]] = field(default_factory=list)  # anonymized
    prior_segment_sets: list[SegmentSet] = field(default_factory=list)
    turn: int = 0

    def __post_init__(self) -> None:
        if self.config.variant.turn_level and self.discourse is None:
            self.discourse = net.initial_discourse(self.params)


def new_session(
    config: ModelConfig,
    params: ModelParameters,
    dictionary: EntityDictionary,
    document_date: dt.date,
) -> InferenceSessionState:
    return InferenceSessionState(
        config=config, params=params, dictionary=dictionary, document_date=document_date
    )


def predict_turn(
    state: InferenceSessionState,
    utterance: Utterance,
    max_tokens: int = 300,
    database: Database | None = None,
    gold_previous: list[list[str]] | None = None,
) -> PredictionRecord:
    """Predict one turn and advance the session state.

    Segments come from the most recent previous query that parses (and that,
    when a database is given, follows its schema); ``gold_previous`` replaces
    the model's own previous queries as the segment source for gold-mode
    evaluation.
    """
    config, params = state.config, state.params
    state.turn += 1
    before = dict(state.mapping.entries)
    anon_utt, _ = anonymize_utterance(utterance, state.dictionary, state.document_date, state.mapping)
    added = [(p, l) for p, l in state.mapping.entries.items() if p not in before]

    segments = SegmentSet(turn_index=state.turn)
    source_query = None
    if config.variant.segment_copying and state.turn > 1:
        previous = gold_previous if gold_previous is not None else state.previous_queries
        schema_check = None
        if database is not None:
            schema_check = lambda tree: follows_schema(tree, database)
        segments = extract_segments(previous, state.prior_segment_sets, schema_check=schema_check)
        if len(segments):
            source_query = previous[segments[0].b - 1]

    runner_vocab_in = net.input_vocabulary(config)
    runner_vocab_out = net.output_vocabulary(config)
    inputs = prepare_turn(
        params,
        config,
        runner_vocab_in,
        anon_utt,
        state.turn,
        state.history_tokens,
        state.encoded_history,
        state.discourse,
        segments=segments,
        source_query=source_query,
        out_vocab=runner_vocab_out,
    )
    decode = greedy_decode(inputs, params, config, runner_vocab_out, max_tokens=max_tokens)

    anonymized_query = fix_parentheses(decode.tokens)
    query_tokens = deanonymize(anonymized_query, state.mapping)
    extra = len(anonymized_query) - len(decode.tokens)
    provenance = list(decode.provenance)
    if extra:
        provenance.append((len(decode.tokens), len(anonymized_query), None))

    record = PredictionRecord(
        turn_index=state.turn,
        utterance_tokens=list(utterance.tokens),
        anonymized_utterance=anon_utt,
        decisions=decode.decisions,
        anonymized_query=anonymized_query,
        query_tokens=query_tokens,
        attention=decode.attention,
        attended_tokens=list(inputs.attend.positions),
        segments_used=[
            {
                "a": segments[k].a,
                "b": segments[k].b,
                "l": segments[k].l,
                "r": segments[k].r,
                "text": " ".join(segments[k].tokens),
            }
            for k in decode.segments_used
        ],
        segments_available=len(segments),
        segment_source_turn=segments[0].b if len(segments) else None,
        provenance=provenance,
        anonymization_added=added,
        n_generated=len(decode.tokens),
        ended=decode.ended,
    )

    state.discourse = inputs.discourse
    state.encoded_history.append(inputs.encoded)
    state.history_tokens.append(anon_utt)
    state.previous_queries.append(anonymized_query)
    state.prior_segment_sets.append(segments)
    return record


def predict_interaction(
    config: ModelConfig,
    params: ModelParameters,
    dictionary: EntityDictionary,
    interaction,
    previous_query_mode: str = "predicted",
    max_tokens: int = 300,
    database: Database | None = None,
) -> list[PredictionRecord]:
    """Run greedy inference over a whole interaction.

    In gold mode the segment-extraction stream uses the annotated previous
    queries (anonymized with the session mapping); everything else is still
    predicted.
    """
    if previous_query_mode not in ("predicted", "gold"):
        raise ValueError(f"unknown previous-query mode {previous_query_mode!r}")
    state = new_session(config, params, dictionary, interaction.document_date)
    records = []
    gold_anonymized: list[list[str]] = []
    for utterance, query in interaction.turns:
        gold_stream = gold_anonymized if previous_query_mode == "gold" else None
        records.append(
            predict_turn(
                state,
                utterance,
                max_tokens=max_tokens,
                database=database,
                gold_previous=gold_stream,
            )
        )
        gold_anonymized.append(anonymize_query(query.shortest_gold(), state.mapping))
    return records
