"""Model configuration and system variants."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

from ..placeholders import ANON_TYPES


class Variant(str, Enum):
    """The five system configurations, ordered by increasing machinery."""

    SEQ2SEQ_0 = "seq2seq-0"
    SEQ2SEQ_H = "seq2seq-h"
    S2S_ANON = "s2s-anon"
    FULL_0 = "full-0"
    FULL = "full"

    @property
    def turn_level(self) -> bool:
        """Discourse-state recurrence plus utterance-position attention."""
        return self in (Variant.FULL_0, Variant.FULL)

    @property
    def concat_history(self) -> bool:
        """History provided by concatenating previous utterances with delimiters."""
        return self in (Variant.SEQ2SEQ_H, Variant.S2S_ANON)

    @property
    def anon_scoring(self) -> bool:
        """Placeholders scored from attention magnitude instead of vocab rows."""
        return self in (Variant.S2S_ANON, Variant.FULL_0, Variant.FULL)

    @property
    def segment_copying(self) -> bool:
        return self in (Variant.FULL_0, Variant.FULL)

    @property
    def default_history(self) -> int:
        return 0 if self in (Variant.SEQ2SEQ_0, Variant.FULL_0) else 3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    variant: Variant
    word_embedding_dim: int = 400
    hidden_dim: int = 800
    position_embedding_dim: int = 50
    segment_age_embedding_dim: int = 64
    history_window: int = 3
    max_segment_age: int = 4
    decoder_layers: int = 2
    input_tokens: tuple[str, ...] = ()
    output_embed_tokens: tuple[str, ...] = ()
    output_gen_tokens: tuple[str, ...] = ()
    anon_types: tuple[str, ...] = ANON_TYPES
    seed: int = 1

    def __post_init__(self) -> None:
        if min(self.word_embedding_dim, self.hidden_dim, self.position_embedding_dim,
               self.segment_age_embedding_dim) <= 0:
            raise ConfigError("all dimensions must be positive")
        if self.history_window < 0:
            raise ConfigError("history window must be >= 0")
        if self.max_segment_age < 1:
            raise ConfigError("max segment age must be >= 1")
        if self.decoder_layers != 2:
            raise ConfigError("the decoder is a two-layer recurrence")
        if self.hidden_dim % 2:
            raise ConfigError("hidden_dim must be even (split across directions)")
        if (2 * self.hidden_dim - self.segment_age_embedding_dim) % 4:
            raise ConfigError(
                "2*hidden_dim - segment_age_embedding_dim must be divisible by 4 "
                "to size the segment encoder"
            )

    @classmethod
    def for_variant(cls, variant: Variant | str, **overrides) -> ModelConfig:
        variant = Variant(variant)
        overrides.setdefault("history_window", variant.default_history)
        return cls(variant=variant, **overrides)

    def with_vocab(self, input_tokens, output_embed_tokens, output_gen_tokens) -> ModelConfig:
        return replace(
            self,
            input_tokens=tuple(input_tokens),
            output_embed_tokens=tuple(output_embed_tokens),
            output_gen_tokens=tuple(output_gen_tokens),
        )

    # Derived dimensions -----------------------------------------------------

    @property
    def encoder_dir_dim(self) -> int:
        return self.hidden_dim // 2

    @property
    def segment_dir_dim(self) -> int:
        return (2 * self.hidden_dim - self.segment_age_embedding_dim) // 4

    @property
    def attention_key_dim(self) -> int:
        """Width of an attendable row: encoder state plus, for turn-level
        variants, the utterance-distance embedding."""
        if self.variant.turn_level:
            return self.hidden_dim + self.position_embedding_dim
        return self.hidden_dim

    @property
    def context_dim(self) -> int:
        return self.attention_key_dim

    @property
    def encoder_input_dim(self) -> int:
        if self.variant.turn_level:
            return self.word_embedding_dim + self.hidden_dim
        return self.word_embedding_dim

    @property
    def position_rows(self) -> int:
        return max(1, self.history_window)

    @property
    def age_rows(self) -> int:
        # one row per age 0..g-1 plus the shared row for ages >= g
        return self.max_segment_age + 1
