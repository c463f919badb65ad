"""Training loop: Adam with validation-driven learning-rate decay and patience."""

from __future__ import annotations

import time
from dataclasses import dataclass, field, asdict

import numpy as np

from ..corpus.split import split_by_scenario
from ..corpus.types import CorpusError, Interaction
from ..neural.config import ModelConfig
from ..neural.params import ModelParameters, init_parameters
from ..neural.runtime import greedy_decode, prepare_turn
from ..neural import net
from ..preprocess.dictionary import EntityDictionary
from .data import InteractionExample, build_examples, attach_vocabularies
from .losses import ModelRunner, interaction_loss, utterance_batch_loss
from .optim import Adam


class TrainingDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.001
    batch_size: int = 16
    initial_patience: float = 10.0
    patience_multiplier: float = 1.01
    lr_decay: float = 0.8
    dropout: float = 0.5
    max_gold_tokens: int = 200
    validation_fraction: float = 0.05
    max_epochs: int = 100
    seed: int = 1

    def __post_init__(self) -> None:
        for name in ("learning_rate", "lr_decay", "validation_fraction"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.batch_size < 1 or self.max_epochs < 1:
            raise ValueError("batch_size and max_epochs must be >= 1")


@dataclass
class ScheduleState:
    """Learning-rate decay on validation-loss increase, patience growth on new
    best validation token accuracy."""

    lr: float
    patience: float
    lr_decay: float
    patience_multiplier: float
    best_token_acc: float = -1.0
    best_token_epoch: int = 0
    prev_val_loss: float | None = None

    def update(self, epoch: int, val_loss: float, val_token_acc: float) -> None:
        if self.prev_val_loss is not None and val_loss > self.prev_val_loss:
            self.lr *= self.lr_decay
        self.prev_val_loss = val_loss
        if val_token_acc > self.best_token_acc:
            self.best_token_acc = val_token_acc
            self.best_token_epoch = epoch
            self.patience *= self.patience_multiplier

    def should_stop(self, epoch: int) -> bool:
        return epoch - self.best_token_epoch > self.patience


@dataclass
class EpochRecord:
    epoch: int
    lr: float
    patience: float
    train_loss: float
    val_token_loss: float
    val_token_acc: float
    val_string_acc: float
    zero_prob_steps: int
    timestamp: float = field(default=0.0)

    def log_dict(self) -> dict:
        doc = asdict(self)
        doc["timestamp"] = self.timestamp
        return doc


@dataclass
class TrainResult:
    config: ModelConfig
    params: ModelParameters
    log: list[EpochRecord]
    best_epoch: int
    stopped_epoch: int


def _validation_pass(runner: ModelRunner, examples: list[InteractionExample], max_gold: int):
    """Token loss/accuracy under teacher forcing and string accuracy under a
    teacher-free greedy decode, with gold history; no dropout."""
    total_loss, counted, correct, zero_prob = 0.0, 0, 0, 0
    string_hits, string_total = 0, 0
    for example in examples:
        results = runner.interaction_forward(example, max_gold_tokens=max_gold)
        for r in results:
            total_loss += sum(-lp.data for lp in r.log_probs)
            counted += r.n_counted
            correct += r.n_correct
            zero_prob += r.n_zero_prob
        string_hits += _string_matches(runner, example)
        string_total += example.n_turns
    return (
        total_loss / max(counted, 1),
        correct / max(counted + zero_prob, 1),
        string_hits / max(string_total, 1),
        zero_prob,
    )


def _string_matches(runner: ModelRunner, example: InteractionExample) -> int:
    """Greedy decodes matching the anonymized gold exactly, with gold previous
    queries supplying history and segments."""
    cfg, params = runner.config, runner.params
    discourse = net.initial_discourse(params) if cfg.variant.turn_level else None
    encoded_history = []
    history_tokens: list[list[str]] = []
    hits = 0
    for turn in example.turns:
        inputs = prepare_turn(
            params, cfg, runner.in_vocab,
            turn.utterance_tokens, turn.turn_index, history_tokens, encoded_history,
            discourse, segments=turn.segments, source_query=turn.source_query,
            out_vocab=runner.out_vocab,
        )
        # a decode still running past the gold length cannot match; cap it there
        decode = greedy_decode(inputs, params, cfg, runner.out_vocab,
                               max_tokens=len(turn.gold_anonymized) + 2)
        if decode.ended and decode.tokens == turn.gold_anonymized:
            hits += 1
        discourse = inputs.discourse
        encoded_history.append(inputs.encoded)
        history_tokens.append(turn.utterance_tokens)
    return hits


def train(
    interactions: list[Interaction],
    dictionary: EntityDictionary,
    model_config: ModelConfig,
    train_config: TrainConfig,
    log_sink=None,
    stop_when=None,
) -> TrainResult:
    """Train a model, returning the parameters with the best validation
    string accuracy and the per-epoch log.

    With ``validation_fraction == 0`` the training set doubles as the
    validation set (useful for capacity checks); otherwise a scenario-disjoint
    slice is held out.
    """
    if not interactions:
        raise CorpusError("cannot train on an empty interaction set")

    if train_config.validation_fraction > 0:
        train_set, val_set = split_by_scenario(
            interactions,
            (1.0 - train_config.validation_fraction, train_config.validation_fraction),
            seed=train_config.seed,
        )
    else:
        train_set, val_set = interactions, interactions

    raw_config = model_config
    train_examples = build_examples(train_set, dictionary, raw_config)
    val_examples = build_examples(val_set, dictionary, raw_config)
    config = attach_vocabularies(raw_config, train_examples)
    params = init_parameters(config, np.random.default_rng(config.seed))
    runner = ModelRunner(config, params)
    optimizer = Adam(params)

    shuffle_rng = np.random.default_rng(train_config.seed * 3 + 1)
    dropout_rng = np.random.default_rng(train_config.seed * 3 + 2)
    turn_level = config.variant.turn_level

    schedule = ScheduleState(
        lr=train_config.learning_rate,
        patience=train_config.initial_patience,
        lr_decay=train_config.lr_decay,
        patience_multiplier=train_config.patience_multiplier,
    )
    best_string_acc = -1.0
    best_arrays = params.copy_arrays()
    best_epoch = 0
    log: list[EpochRecord] = []

    flat_units = [
        (ex, turn.turn_index) for ex in train_examples for turn in ex.turns
    ]

    epoch = 0
    for epoch in range(1, train_config.max_epochs + 1):
        epoch_loss_total, epoch_loss_count = 0.0, 0
        zero_prob_steps = 0
        if turn_level:
            order = list(range(len(train_examples)))
            shuffle_rng.shuffle(order)
            for idx in order:
                example = train_examples[idx]
                params.zero_grad()
                results = runner.interaction_forward(
                    example,
                    dropout_rng=dropout_rng,
                    dropout_p=train_config.dropout,
                    max_gold_tokens=train_config.max_gold_tokens,
                )
                zero_prob_steps += sum(r.n_zero_prob for r in results)
                loss = interaction_loss(results, example.n_turns, train_config.batch_size)
                if loss is None:
                    continue
                if not np.isfinite(loss.data):
                    raise TrainingDiverged(
                        f"non-finite loss in epoch {epoch} on {example.interaction_id}"
                    )
                loss.backward()
                optimizer.step(schedule.lr)
                epoch_loss_total += float(loss.data)
                epoch_loss_count += 1
        else:
            order = list(range(len(flat_units)))
            shuffle_rng.shuffle(order)
            for start in range(0, len(order), train_config.batch_size):
                batch = [flat_units[i] for i in order[start : start + train_config.batch_size]]
                params.zero_grad()
                results = []
                for example, turn_index in batch:
                    results.extend(
                        runner.interaction_forward(
                            example,
                            dropout_rng=dropout_rng,
                            dropout_p=train_config.dropout,
                            max_gold_tokens=train_config.max_gold_tokens,
                            only_turn=turn_index,
                        )
                    )
                zero_prob_steps += sum(r.n_zero_prob for r in results)
                loss = utterance_batch_loss(results)
                if loss is None:
                    continue
                if not np.isfinite(loss.data):
                    raise TrainingDiverged(f"non-finite loss in epoch {epoch}")
                loss.backward()
                optimizer.step(schedule.lr)
                epoch_loss_total += float(loss.data)
                epoch_loss_count += 1

        val_loss, val_token_acc, val_string_acc, val_zero = _validation_pass(
            runner, val_examples, train_config.max_gold_tokens
        )
        record = EpochRecord(
            epoch=epoch,
            lr=schedule.lr,
            patience=schedule.patience,
            train_loss=epoch_loss_total / max(epoch_loss_count, 1),
            val_token_loss=val_loss,
            val_token_acc=val_token_acc,
            val_string_acc=val_string_acc,
            zero_prob_steps=zero_prob_steps,
            timestamp=time.time(),
        )
        log.append(record)
        if log_sink is not None:
            log_sink(record)

        schedule.update(epoch, val_loss, val_token_acc)
        if val_string_acc >= best_string_acc:
            best_string_acc = val_string_acc
            best_arrays = params.copy_arrays()
            best_epoch = epoch
        if schedule.should_stop(epoch):
            break
        if stop_when is not None and stop_when(record):
            break

    params.load_arrays(best_arrays)
    return TrainResult(
        config=config, params=params, log=log, best_epoch=best_epoch, stopped_epoch=epoch
    )
