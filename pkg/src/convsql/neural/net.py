"""Network forward passes: encoding, attention, and the joint output distribution.

The decoder chooses among three output families normalized together: ordinary
query tokens (projection rows), anonymized placeholders (summed exponentiated
attention scores at their occurrence positions), and copyable segments
(bilinear score against the segment encoding).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..placeholders import split_placeholder
from ..sqlkit.segments import SegmentSet
from . import autograd as ag
from .autograd import Tensor
from .config import ModelConfig
from .params import ModelParameters
from .vocab import DELIM, START, InputVocabulary, OutputVocabulary


@dataclass
class EncodedUtterance:
    turn_index: int
    tokens: list[str]
    states: Tensor  # (n, hidden)
    final_h: Tensor  # (hidden,)
    final_c: Tensor  # (hidden,)
    attendable: np.ndarray  # bool per token
    row_turns: list[int] | None = None  # per-token source turn (concatenated encodings)


@dataclass
class DiscourseState:
    h: Tensor
    c: Tensor


@dataclass
class Attendables:
    """Everything the decoder can attend to at one turn."""

    matrix: Tensor  # (N, attention_key_dim)
    keys: Tensor  # (N, hidden): matrix @ w_att, shared by every step of the turn
    mask: np.ndarray  # bool (N,)
    positions: list[tuple[int, str]]  # (turn index, token) per row
    anon_tokens: list[str] = field(default_factory=list)
    anon_positions: dict[str, np.ndarray] = field(default_factory=dict)


@dataclass
class DecoderState:
    layers: list[tuple[Tensor, Tensor]]
    context: Tensor


@dataclass
class DecoderStep:
    scores: Tensor  # (N,) attention scores
    alpha: Tensor  # (N,) attention distribution
    context: Tensor
    m: Tensor
    log_probs: Tensor  # over gen tokens + anon tokens + segments
    n_gen: int
    anon_tokens: list[str]
    n_segments: int

    def family_slices(self) -> tuple[slice, slice, slice]:
        a = self.n_gen
        b = a + len(self.anon_tokens)
        return slice(0, a), slice(a, b), slice(b, b + self.n_segments)


def input_vocabulary(config: ModelConfig) -> InputVocabulary:
    return InputVocabulary(tokens=config.input_tokens, anon_scoring=config.variant.anon_scoring)


def output_vocabulary(config: ModelConfig) -> OutputVocabulary:
    return OutputVocabulary(
        embed_tokens=config.output_embed_tokens,
        gen_tokens=config.output_gen_tokens,
        anon_scoring=config.variant.anon_scoring,
    )


def _bidirectional(inputs: Tensor, params: ModelParameters, prefix: str):
    """Forward and backward recurrences over input rows.

    Returns per-token states (n, 2*dir), plus the hidden and cell memory at
    the final token position, each the concatenation of both directions there.
    """
    fwd = ag.lstm_sequence(inputs, params[f"{prefix}_fwd_w"], params[f"{prefix}_fwd_u"], params[f"{prefix}_fwd_b"])
    bwd = ag.lstm_sequence(
        inputs, params[f"{prefix}_bwd_w"], params[f"{prefix}_bwd_u"], params[f"{prefix}_bwd_b"], reverse=True
    )
    n = inputs.shape[0]
    states = ag.concat([fwd[0], bwd[0]], axis=1)
    final_h = ag.concat([fwd[0][n - 1], bwd[0][n - 1]])
    final_c = ag.concat([fwd[1][n - 1], bwd[1][n - 1]])
    return states, final_h, final_c


def encode_utterance(
    tokens,
    params: ModelParameters,
    config: ModelConfig,
    vocab: InputVocabulary,
    discourse: DiscourseState | None = None,
    turn_index: int = 1,
) -> EncodedUtterance:
    """Bidirectional encoding; with the turn-level variant each input is the
    token embedding concatenated with the previous discourse state."""
    tokens = list(tokens)
    if not tokens:
        raise ValueError("cannot encode an empty utterance")
    ids = [vocab.embed_id(t) for t in tokens]
    rows = ag.gather_rows(params["emb_in"], ids)
    if config.variant.turn_level:
        if discourse is None:
            raise ValueError("turn-level encoding needs a discourse state")
        rows = ag.concat([rows, ag.repeat_row(discourse.h, len(tokens))], axis=1)
    states, final_h, final_c = _bidirectional(rows, params, "enc")
    attendable = np.array([t != DELIM for t in tokens])
    return EncodedUtterance(
        turn_index=turn_index,
        tokens=tokens,
        states=states,
        final_h=final_h,
        final_c=final_c,
        attendable=attendable,
    )


def initial_discourse(params: ModelParameters) -> DiscourseState:
    return DiscourseState(h=params["disc_h0"], c=params["disc_c0"])


def update_discourse(
    discourse: DiscourseState, encoded: EncodedUtterance, params: ModelParameters
) -> DiscourseState:
    h, c = ag.lstm_cell(
        encoded.final_h, discourse.h, discourse.c, params["disc_w"], params["disc_u"], params["disc_b"]
    )
    return DiscourseState(h=h, c=c)


def build_attendables(
    encoded: list[EncodedUtterance],
    current_turn: int,
    params: ModelParameters,
    config: ModelConfig,
) -> Attendables:
    """Rows for attention over the current and up to h previous utterances.

    Turn-level variants append the utterance-distance embedding to every row;
    distances at or past the history window share the last embedding row.
    """
    blocks = []
    positions: list[tuple[int, str]] = []
    mask_parts = []
    for enc in encoded:
        block = enc.states
        if config.variant.turn_level:
            distance = min(current_turn - enc.turn_index, config.position_rows - 1)
            pos_row = params["pos_emb"][distance]
            block = ag.concat([block, ag.repeat_row(pos_row, len(enc.tokens))], axis=1)
        blocks.append(block)
        row_turns = enc.row_turns or [enc.turn_index] * len(enc.tokens)
        positions.extend(zip(row_turns, enc.tokens))
        mask_parts.append(enc.attendable)
    matrix = blocks[0] if len(blocks) == 1 else ag.concat(blocks, axis=0)
    mask = np.concatenate(mask_parts)

    anon_tokens: list[str] = []
    anon_positions: dict[str, list[int]] = {}
    if config.variant.anon_scoring:
        for row, ((_, token), ok) in enumerate(zip(positions, mask)):
            if ok and split_placeholder(token) is not None:
                anon_positions.setdefault(token, []).append(row)
        order = {t: i for i, t in enumerate(config.anon_types)}
        anon_tokens = sorted(
            anon_positions,
            key=lambda t: (order[split_placeholder(t)[0]], split_placeholder(t)[1]),
        )
    return Attendables(
        matrix=matrix,
        keys=ag.matmul(matrix, params["w_att"]),
        mask=mask,
        positions=positions,
        anon_tokens=anon_tokens,
        anon_positions={t: np.array(rows) for t, rows in anon_positions.items()},
    )


def encode_segments(
    source_tokens,
    segments: SegmentSet,
    current_turn: int,
    params: ModelParameters,
    config: ModelConfig,
    vocab: OutputVocabulary,
) -> Tensor | None:
    """Segment vectors: endpoint states of a bidirectional pass over the source
    query, plus the capped age embedding of the segment's first appearance."""
    if len(segments) == 0:
        return None
    ids = [vocab.embed_id(t) for t in source_tokens]
    rows = ag.gather_rows(params["emb_out"], ids)
    states, _, _ = _bidirectional(rows, params, "seg")
    vectors = []
    for seg in segments:
        age = min(max(current_turn - seg.a, 0), config.max_segment_age)
        vectors.append(
            ag.concat([states[seg.l - 1], states[seg.r - 1], params["age_emb"][age]])
        )
    return ag.stack_rows(vectors)


def embed_output(
    symbol: str | int,
    segments: SegmentSet | None,
    params: ModelParameters,
    vocab: OutputVocabulary,
):
    """Embedding of the previous output: a token row, or for a copied segment
    (given by set position) the mean of its token rows."""
    if isinstance(symbol, int):
        seg = segments[symbol]
        ids = [vocab.embed_id(t) for t in seg.tokens]
        return ag.mean_rows(ag.gather_rows(params["emb_out"], ids))
    return params["emb_out"][vocab.embed_id(symbol)]


def init_decoder_state(encoded: EncodedUtterance, config: ModelConfig) -> DecoderState:
    layers = [(encoded.final_h, encoded.final_c) for _ in range(config.decoder_layers)]
    return DecoderState(layers=layers, context=Tensor(np.zeros(config.context_dim)))


def start_embedding(params: ModelParameters, vocab: OutputVocabulary) -> Tensor:
    return params["emb_out"][vocab.embed_id(START)]


def decoder_step(
    prev_embedding: Tensor,
    state: DecoderState,
    attend: Attendables,
    params: ModelParameters,
    config: ModelConfig,
    segment_vectors: Tensor | None = None,
    dropout_rng: np.random.Generator | None = None,
    dropout_p: float = 0.0,
) -> tuple[DecoderStep, DecoderState]:
    """One decoding step: two recurrence layers, attention, and the jointly
    normalized distribution over tokens, placeholders, and segments."""
    x = ag.concat([prev_embedding, state.context])
    (h1, c1), (h2, c2) = state.layers
    h1n, c1n = ag.lstm_cell(x, h1, c1, params["dec_l1_w"], params["dec_l1_u"], params["dec_l1_b"])
    between = h1n
    if dropout_rng is not None and dropout_p > 0.0:
        between = ag.dropout(between, dropout_p, dropout_rng)
    h2n, c2n = ag.lstm_cell(
        between, h2, c2, params["dec_l2_w"], params["dec_l2_u"], params["dec_l2_b"]
    )

    scores = ag.matmul(attend.keys, h2n)  # (N,)
    alpha = ag.masked_softmax(scores, attend.mask)
    context = ag.matmul(alpha, attend.matrix)  # (key_dim,)

    m = ag.tanh(ag.matmul(ag.concat([h2n, context]), params["w_m"]))
    if dropout_rng is not None and dropout_p > 0.0:
        m = ag.dropout(m, dropout_p, dropout_rng)

    logits = [ag.add(ag.matmul(m, params["w_out"]), params["b_out"])]
    if attend.anon_tokens:
        groups = [attend.anon_positions[t] for t in attend.anon_tokens]
        logits.append(ag.grouped_logsumexp(scores, groups))
    n_segments = 0
    if segment_vectors is not None:
        n_segments = segment_vectors.shape[0]
        logits.append(ag.matmul(segment_vectors, ag.matmul(m, params["w_seg"])))
    joint = logits[0] if len(logits) == 1 else ag.concat(logits)
    log_probs = ag.log_softmax(joint)

    step = DecoderStep(
        scores=scores,
        alpha=alpha,
        context=context,
        m=m,
        log_probs=log_probs,
        n_gen=len(config.output_gen_tokens),
        anon_tokens=list(attend.anon_tokens),
        n_segments=n_segments,
    )
    new_state = DecoderState(layers=[(h1n, c1n), (h2n, c2n)], context=context)
    return step, new_state
