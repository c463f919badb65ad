"""Greedy inference over interactions and execution-based evaluation."""

from .metrics import MetricLatticeError, MetricsReport, evaluate, score_prediction
from .plots import plot_history_sweep, plot_per_turn_curve
from .session import (
    InferenceSessionState,
    PredictionRecord,
    new_session,
    predict_interaction,
    predict_turn,
)

__all__ = [
    "InferenceSessionState",
    "MetricLatticeError",
    "MetricsReport",
    "PredictionRecord",
    "evaluate",
    "new_session",
    "plot_history_sweep",
    "plot_per_turn_curve",
    "predict_interaction",
    "predict_turn",
    "score_prediction",
]
