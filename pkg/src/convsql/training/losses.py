"""Token cross-entropy losses in the per-utterance and per-interaction forms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..neural import autograd as ag
from ..neural.autograd import Tensor
from ..neural.config import ModelConfig
from ..neural.net import input_vocabulary, output_vocabulary
from ..neural import net
from ..neural.params import ModelParameters
from ..neural.runtime import prepare_turn, teacher_forced_turn
from .data import InteractionExample, TurnExample


@dataclass
class TurnForward:
    log_probs: list  # Tensor per counted target symbol
    n_target: int  # symbols including the end token
    n_counted: int
    n_correct: int
    n_zero_prob: int  # gold symbols with no probability mass under this variant
    skipped_for_length: bool


class ModelRunner:
    """Forward passes over interaction examples for one parameter set."""

    def __init__(self, config: ModelConfig, params: ModelParameters):
        self.config = config
        self.params = params
        self.in_vocab = input_vocabulary(config)
        self.out_vocab = output_vocabulary(config)

    def interaction_forward(
        self,
        example: InteractionExample,
        dropout_rng: np.random.Generator | None = None,
        dropout_p: float = 0.0,
        max_gold_tokens: int | None = None,
        only_turn: int | None = None,
    ) -> list[TurnForward]:
        """Teacher-forced pass over an interaction.

        Turns whose aligned gold exceeds ``max_gold_tokens`` contribute no
        loss, but their utterance is still encoded and, for turn-level
        variants, the discourse state still advances.
        """
        cfg = self.config
        if only_turn is not None and not cfg.variant.turn_level:
            # no cross-turn tensors: score the one turn directly
            turn = example.turns[only_turn - 1]
            history_tokens = [t.utterance_tokens for t in example.turns[: only_turn - 1]]
            inputs = prepare_turn(
                self.params, cfg, self.in_vocab,
                turn.utterance_tokens, turn.turn_index, history_tokens, [], None,
                segments=turn.segments, source_query=turn.source_query,
                out_vocab=self.out_vocab,
            )
            if max_gold_tokens is not None and len(turn.target) > max_gold_tokens:
                return [TurnForward([], len(turn.target) + 1, 0, 0, 0, skipped_for_length=True)]
            forced = teacher_forced_turn(
                inputs, turn.target, self.params, cfg, self.out_vocab,
                dropout_rng=dropout_rng, dropout_p=dropout_p,
            )
            return [
                TurnForward(
                    log_probs=forced.log_probs,
                    n_target=forced.n_target,
                    n_counted=len(forced.log_probs),
                    n_correct=forced.n_correct,
                    n_zero_prob=forced.n_skipped,
                    skipped_for_length=False,
                )
            ]

        discourse = net.initial_discourse(self.params) if cfg.variant.turn_level else None
        encoded_history = []
        history_tokens: list[list[str]] = []
        results = []
        for turn in example.turns:
            inputs = prepare_turn(
                self.params,
                cfg,
                self.in_vocab,
                turn.utterance_tokens,
                turn.turn_index,
                history_tokens,
                encoded_history,
                discourse,
                segments=turn.segments,
                source_query=turn.source_query,
                out_vocab=self.out_vocab,
            )
            too_long = max_gold_tokens is not None and len(turn.target) > max_gold_tokens
            wanted = only_turn is None or turn.turn_index == only_turn
            if too_long or not wanted:
                results.append(
                    TurnForward([], len(turn.target) + 1, 0, 0, 0, skipped_for_length=too_long)
                )
            else:
                forced = teacher_forced_turn(
                    inputs,
                    turn.target,
                    self.params,
                    cfg,
                    self.out_vocab,
                    dropout_rng=dropout_rng,
                    dropout_p=dropout_p,
                )
                results.append(
                    TurnForward(
                        log_probs=forced.log_probs,
                        n_target=forced.n_target,
                        n_counted=len(forced.log_probs),
                        n_correct=forced.n_correct,
                        n_zero_prob=forced.n_skipped,
                        skipped_for_length=False,
                    )
                )
            discourse = inputs.discourse
            encoded_history.append(inputs.encoded)
            history_tokens.append(turn.utterance_tokens)
        return results


def _loss_over(results: list[TurnForward]) -> tuple[Tensor | None, int]:
    log_probs = [lp for r in results for lp in r.log_probs]
    if not log_probs:
        return None, 0
    negs = [ag.scale(lp, -1.0) for lp in log_probs]
    return ag.add_scalars(negs), len(negs)


def utterance_batch_loss(results: list[TurnForward]) -> Tensor | None:
    """Mean token loss over every counted target symbol in the batch."""
    total, count = _loss_over(results)
    return None if total is None else ag.scale(total, 1.0 / count)


def interaction_loss(results: list[TurnForward], n_utterances: int, batch_size: int) -> Tensor | None:
    """(n/B) times the mean token loss, keeping gradient magnitude independent
    of interaction length."""
    total, count = _loss_over(results)
    if total is None:
        return None
    return ag.scale(total, (n_utterances / batch_size) / count)


def reweighted_loss_value(token_losses_per_turn: list[list[float]], batch_size: int) -> float:
    """Scalar form of the interaction loss over plain numbers, so the identity
    against the mean token loss is testable on arbitrary inputs."""
    n = len(token_losses_per_turn)
    flat = [x for turn in token_losses_per_turn for x in turn]
    return (n / batch_size) * (sum(flat) / len(flat))


def mean_token_loss_value(token_losses_per_turn: list[list[float]]) -> float:
    flat = [x for turn in token_losses_per_turn for x in turn]
    return sum(flat) / len(flat)
