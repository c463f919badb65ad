"""Neural components: autograd, kernels, configuration, and the model itself."""

from .config import ConfigError, ModelConfig, Variant
from .params import (
    ModelParameters,
    init_parameters,
    load_checkpoint,
    parameter_shapes,
    save_checkpoint,
)
from .vocab import DELIM, END, START, UNK, InputVocabulary, OutputVocabulary, build_vocabularies

__all__ = [
    "ConfigError",
    "DELIM",
    "END",
    "InputVocabulary",
    "ModelConfig",
    "ModelParameters",
    "OutputVocabulary",
    "START",
    "UNK",
    "Variant",
    "build_vocabularies",
    "init_parameters",
    "load_checkpoint",
    "parameter_shapes",
    "save_checkpoint",
]
