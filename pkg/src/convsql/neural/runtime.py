"""Per-turn orchestration shared by teacher-forced training and greedy inference."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..placeholders import split_placeholder, split_segment_ref
from ..sqlkit.segments import SegmentSet
from . import net
from .autograd import Tensor
from .config import ModelConfig
from .net import (
    Attendables,
    DecoderState,
    DecoderStep,
    DiscourseState,
    EncodedUtterance,
)
from .params import ModelParameters
from .vocab import DELIM, END, InputVocabulary, OutputVocabulary


@dataclass
class TurnInputs:
    attend: Attendables
    dec_init: DecoderState
    encoded: EncodedUtterance
    segments: SegmentSet
    seg_vectors: Tensor | None
    discourse: DiscourseState | None


def prepare_turn(
    params: ModelParameters,
    config: ModelConfig,
    in_vocab: InputVocabulary,
    current_tokens: list[str],
    turn_index: int,
    history_tokens: list[list[str]],
    encoded_history: list[EncodedUtterance],
    discourse: DiscourseState | None,
    segments: SegmentSet | None = None,
    source_query: list[str] | None = None,
    out_vocab: OutputVocabulary | None = None,
) -> TurnInputs:
    """Encode the current turn and assemble everything the decoder needs.

    For turn-level variants the current utterance is encoded against the
    incoming discourse state and attention covers stored encodings of up to h
    previous utterances; concatenation variants re-encode the last h
    utterances joined by delimiter tokens; the baseline sees only the current
    utterance.
    """
    h = config.history_window
    segments = segments if segments is not None else SegmentSet(turn_index=turn_index)

    if config.variant.turn_level:
        encoded = net.encode_utterance(
            current_tokens, params, config, in_vocab, discourse=discourse, turn_index=turn_index
        )
        new_discourse = net.update_discourse(discourse, encoded, params)
        window = (encoded_history[-h:] if h else []) + [encoded]
        attend = net.build_attendables(window, turn_index, params, config)
    else:
        new_discourse = None
        history = history_tokens[-h:] if h else []
        tokens: list[str] = []
        row_turns: list[int] = []
        first_turn = turn_index - len(history)
        for offset, prev in enumerate(history):
            tokens.extend(prev)
            row_turns.extend([first_turn + offset] * len(prev))
            tokens.append(DELIM)
            row_turns.append(first_turn + offset)
        tokens.extend(current_tokens)
        row_turns.extend([turn_index] * len(current_tokens))
        encoded = net.encode_utterance(
            tokens, params, config, in_vocab, discourse=None, turn_index=turn_index
        )
        encoded.row_turns = row_turns
        attend = net.build_attendables([encoded], turn_index, params, config)

    seg_vectors = None
    if config.variant.segment_copying and len(segments) > 0:
        if source_query is None:
            raise ValueError("segment encoding needs the source query tokens")
        seg_vectors = net.encode_segments(
            source_query, segments, turn_index, params, config, out_vocab
        )

    return TurnInputs(
        attend=attend,
        dec_init=net.init_decoder_state(encoded, config),
        encoded=encoded,
        segments=segments,
        seg_vectors=seg_vectors,
        discourse=new_discourse,
    )


def target_output_index(step: DecoderStep, out_vocab: OutputVocabulary, symbol: str) -> int | None:
    """Position of a gold symbol in the step's joint distribution, or None when
    the symbol cannot be generated at this step."""
    ref = split_segment_ref(symbol)
    if ref is not None:
        if 1 <= ref <= step.n_segments:
            return step.n_gen + len(step.anon_tokens) + ref - 1
        return None
    if out_vocab.anon_scoring and split_placeholder(symbol) is not None:
        try:
            return step.n_gen + step.anon_tokens.index(symbol)
        except ValueError:
            return None
    return out_vocab.gen_id(symbol)


def _symbol_embedding(symbol: str, inputs: TurnInputs, params, out_vocab):
    ref = split_segment_ref(symbol)
    if ref is not None:
        return net.embed_output(ref - 1, inputs.segments, params, out_vocab)
    return net.embed_output(symbol, inputs.segments, params, out_vocab)


@dataclass
class TeacherForcedTurn:
    log_probs: list  # Tensor per counted step
    n_target: int
    n_skipped: int  # steps whose gold symbol has no probability mass
    n_correct: int  # argmax matches gold (skipped steps count as wrong)
    steps: list[DecoderStep] = field(default_factory=list)


def teacher_forced_turn(
    inputs: TurnInputs,
    target_symbols: list[str],
    params: ModelParameters,
    config: ModelConfig,
    out_vocab: OutputVocabulary,
    dropout_rng: np.random.Generator | None = None,
    dropout_p: float = 0.0,
    keep_steps: bool = False,
) -> TeacherForcedTurn:
    """Score the aligned gold sequence (END appended) under teacher forcing."""
    symbols = list(target_symbols) + [END]
    state = inputs.dec_init
    prev_emb = net.start_embedding(params, out_vocab)
    log_probs = []
    n_skipped = 0
    n_correct = 0
    steps = []
    for symbol in symbols:
        step, state = net.decoder_step(
            prev_emb,
            state,
            inputs.attend,
            params,
            config,
            segment_vectors=inputs.seg_vectors,
            dropout_rng=dropout_rng,
            dropout_p=dropout_p,
        )
        if keep_steps:
            steps.append(step)
        idx = target_output_index(step, out_vocab, symbol)
        if idx is None:
            n_skipped += 1
        else:
            log_probs.append(step.log_probs[idx])
            if int(np.argmax(step.log_probs.data)) == idx:
                n_correct += 1
        prev_emb = _symbol_embedding(symbol, inputs, params, out_vocab)
    return TeacherForcedTurn(
        log_probs=log_probs,
        n_target=len(symbols),
        n_skipped=n_skipped,
        n_correct=n_correct,
        steps=steps,
    )


@dataclass
class GreedyDecode:
    decisions: list  # gen token strings, placeholder strings, or segment positions (int)
    tokens: list[str]  # expanded anonymized output
    attention: np.ndarray  # (steps, attendable rows)
    provenance: list[tuple[int, int, int | None]]  # (start, end, source turn a) over tokens
    segments_used: list[int]  # set positions of copied segments
    ended: bool


def greedy_decode(
    inputs: TurnInputs,
    params: ModelParameters,
    config: ModelConfig,
    out_vocab: OutputVocabulary,
    max_tokens: int = 300,
) -> GreedyDecode:
    """Greedy generation; a chosen segment expands into its tokens in one step.

    Output length is capped at ``max_tokens`` expanded tokens; ties at the
    argmax resolve to the lowest output index.
    """
    state = inputs.dec_init
    prev_emb = net.start_embedding(params, out_vocab)
    decisions: list = []
    tokens: list[str] = []
    attention_rows = []
    provenance: list[tuple[int, int, int | None]] = []
    segments_used: list[int] = []
    ended = False
    while len(tokens) < max_tokens:
        step, state = net.decoder_step(
            prev_emb, state, inputs.attend, params, config, segment_vectors=inputs.seg_vectors
        )
        attention_rows.append(step.alpha.data.copy())
        choice = int(np.argmax(step.log_probs.data))
        if choice < step.n_gen:
            symbol = out_vocab.gen_tokens[choice]
            if symbol == END:
                ended = True
                break
            decisions.append(symbol)
            provenance.append((len(tokens), len(tokens) + 1, None))
            tokens.append(symbol)
            prev_emb = _symbol_embedding(symbol, inputs, params, out_vocab)
        elif choice < step.n_gen + len(step.anon_tokens):
            symbol = step.anon_tokens[choice - step.n_gen]
            decisions.append(symbol)
            provenance.append((len(tokens), len(tokens) + 1, None))
            tokens.append(symbol)
            prev_emb = _symbol_embedding(symbol, inputs, params, out_vocab)
        else:
            pos = choice - step.n_gen - len(step.anon_tokens)
            seg = inputs.segments[pos]
            decisions.append(pos)
            segments_used.append(pos)
            take = list(seg.tokens)[: max_tokens - len(tokens)]
            provenance.append((len(tokens), len(tokens) + len(take), seg.a))
            tokens.extend(take)
            prev_emb = net.embed_output(pos, inputs.segments, params, out_vocab)
    return GreedyDecode(
        decisions=decisions,
        tokens=tokens,
        attention=np.array(attention_rows) if attention_rows else np.zeros((0, len(inputs.attend.mask))),
        provenance=provenance,
        segments_used=segments_used,
        ended=ended,
    )
