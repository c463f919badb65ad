"""Teacher-forced training with validation-driven scheduling."""

from .data import InteractionExample, TurnExample, attach_vocabularies, build_examples
from .losses import (
    ModelRunner,
    interaction_loss,
    mean_token_loss_value,
    reweighted_loss_value,
    utterance_batch_loss,
)
from .optim import Adam
from .trainer import EpochRecord, TrainConfig, TrainingDiverged, TrainResult, train

__all__ = [
    "Adam",
    "EpochRecord",
    "InteractionExample",
    "ModelRunner",
    "TrainConfig",
    "TrainResult",
    "TrainingDiverged",
    "TurnExample",
    "attach_vocabularies",
    "build_examples",
    "interaction_loss",
    "mean_token_loss_value",
    "reweighted_loss_value",
    "train",
    "utterance_batch_loss",
]
