"""Assembly of teacher-forcing examples from annotated interactions."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from ..corpus.types import Interaction
from ..neural.config import ModelConfig
from ..neural.vocab import build_vocabularies
from ..placeholders import is_placeholder
from ..preprocess.anonymize import AnonymizationMapping, anonymize_query, anonymize_utterance
from ..preprocess.dictionary import EntityDictionary
from ..sqlkit.segments import SegmentSet, align_gold_with_segments, extract_segments


@dataclass
class TurnExample:
    turn_index: int
    utterance_tokens: list[str]  # anonymized
    target: list[str]  # aligned gold (segment variants) or anonymized gold
    gold_anonymized: list[str]
    segments: SegmentSet
    source_query: list[str] | None
    mapping: AnonymizationMapping  # interaction mapping after this turn


@dataclass
class InteractionExample:
    interaction_id: str
    scenario_id: str
    n_turns: int
    turns: list[TurnExample]


def build_examples(
    interactions: list[Interaction],
    dictionary: EntityDictionary,
    config: ModelConfig,
) -> list[InteractionExample]:
    """Anonymize each interaction and, for segment-copying variants, align
    gold queries against segments extracted from previous gold queries."""
    use_segments = config.variant.segment_copying
    out = []
    for interaction in interactions:
        mapping = AnonymizationMapping()
        prior_sets: list[SegmentSet] = []
        previous_golds: list[list[str]] = []
        turns = []
        for i, (utterance, query) in enumerate(interaction.turns, start=1):
            anon_u, mapping = anonymize_utterance(
                utterance, dictionary, interaction.document_date, mapping
            )
            gold = anonymize_query(query.shortest_gold(), mapping)
            segments = SegmentSet(turn_index=i)
            source_query = None
            target = list(gold)
            if use_segments and previous_golds:
                segments = extract_segments(previous_golds, prior_sets)
                if len(segments):
                    source_query = previous_golds[segments[0].b - 1]
                    current_entities = {t for t in anon_u if is_placeholder(t)}
                    target = align_gold_with_segments(gold, segments, current_entities)
            turns.append(
                TurnExample(
                    turn_index=i,
                    utterance_tokens=anon_u,
                    target=target,
                    gold_anonymized=list(gold),
                    segments=segments,
                    source_query=source_query,
                    mapping=mapping.copy(),
                )
            )
            prior_sets.append(segments)
            previous_golds.append(list(gold))
        out.append(
            InteractionExample(
                interaction_id=interaction.id,
                scenario_id=interaction.scenario_id,
                n_turns=len(turns),
                turns=turns,
            )
        )
    return out


def attach_vocabularies(config: ModelConfig, examples: list[InteractionExample]) -> ModelConfig:
    """Derive vocabularies from training-side examples and pin them on the config."""
    counts: Counter = Counter()
    targets: set[str] = set()
    for ex in examples:
        for turn in ex.turns:
            counts.update(turn.utterance_tokens)
            targets.update(turn.gold_anonymized)
            targets.update(turn.target)
    in_vocab, out_vocab = build_vocabularies(
        dict(counts), targets, config.anon_types, config.variant.anon_scoring
    )
    return config.with_vocab(in_vocab.tokens, out_vocab.embed_tokens, out_vocab.gen_tokens)
