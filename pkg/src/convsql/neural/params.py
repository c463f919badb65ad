"""Parameter initialization and versioned checkpoints."""

from __future__ import annotations

import io
import json

import numpy as np

from .autograd import Tensor
from .config import ConfigError, ModelConfig, Variant

CHECKPOINT_VERSION = 1
INIT_SCALE = 0.1


class ModelParameters:
    """Named parameter tensors for one model configuration."""

    def __init__(self, tensors: dict[str, Tensor]):
        self.tensors = tensors

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self.tensors

    def names(self) -> list[str]:
        return sorted(self.tensors)

    def zero_grad(self) -> None:
        for t in self.tensors.values():
            t.zero_grad()

    def copy_arrays(self) -> dict[str, np.ndarray]:
        return {name: t.data.copy() for name, t in self.tensors.items()}

    def load_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        for name, arr in arrays.items():
            self.tensors[name].data = arr.copy()


def _lstm_shapes(prefix: str, input_dim: int, hidden: int) -> dict[str, tuple]:
    return {
        f"{prefix}_w": (input_dim, 4 * hidden),
        f"{prefix}_u": (hidden, 4 * hidden),
        f"{prefix}_b": (4 * hidden,),
    }


def parameter_shapes(config: ModelConfig) -> dict[str, tuple]:
    e, hidden = config.word_embedding_dim, config.hidden_dim
    shapes: dict[str, tuple] = {
        "emb_in": (len(config.input_tokens), e),
        "emb_out": (len(config.output_embed_tokens), e),
        "w_att": (config.attention_key_dim, hidden),
        "w_m": (hidden + config.context_dim, hidden),
        "w_out": (hidden, len(config.output_gen_tokens)),
        "b_out": (len(config.output_gen_tokens),),
    }
    shapes.update(_lstm_shapes("enc_fwd", config.encoder_input_dim, config.encoder_dir_dim))
    shapes.update(_lstm_shapes("enc_bwd", config.encoder_input_dim, config.encoder_dir_dim))
    shapes.update(_lstm_shapes("dec_l1", e + config.context_dim, hidden))
    shapes.update(_lstm_shapes("dec_l2", hidden, hidden))
    if config.variant.turn_level:
        shapes.update(_lstm_shapes("disc", hidden, hidden))
        shapes["disc_h0"] = (hidden,)
        shapes["disc_c0"] = (hidden,)
        shapes["pos_emb"] = (config.position_rows, config.position_embedding_dim)
    if config.variant.segment_copying:
        shapes.update(_lstm_shapes("seg_fwd", e, config.segment_dir_dim))
        shapes.update(_lstm_shapes("seg_bwd", e, config.segment_dir_dim))
        shapes["w_seg"] = (hidden, 2 * hidden)
        shapes["age_emb"] = (config.age_rows, config.segment_age_embedding_dim)
    return shapes


def init_parameters(config: ModelConfig, rng: np.random.Generator | None = None) -> ModelParameters:
    """All parameters drawn from U[-0.1, 0.1]."""
    rng = rng or np.random.default_rng(config.seed)
    tensors = {
        name: Tensor(rng.uniform(-INIT_SCALE, INIT_SCALE, size=shape), requires_grad=True)
        for name, shape in parameter_shapes(config).items()
    }
    return ModelParameters(tensors)


def _config_to_dict(config: ModelConfig) -> dict:
    return {
        "variant": config.variant.value,
        "word_embedding_dim": config.word_embedding_dim,
        "hidden_dim": config.hidden_dim,
        "position_embedding_dim": config.position_embedding_dim,
        "segment_age_embedding_dim": config.segment_age_embedding_dim,
        "history_window": config.history_window,
        "max_segment_age": config.max_segment_age,
        "decoder_layers": config.decoder_layers,
        "input_tokens": list(config.input_tokens),
        "output_embed_tokens": list(config.output_embed_tokens),
        "output_gen_tokens": list(config.output_gen_tokens),
        "anon_types": list(config.anon_types),
        "seed": config.seed,
    }


def config_from_dict(doc: dict) -> ModelConfig:
    return ModelConfig(
        variant=Variant(doc["variant"]),
        word_embedding_dim=doc["word_embedding_dim"],
        hidden_dim=doc["hidden_dim"],
        position_embedding_dim=doc["position_embedding_dim"],
        segment_age_embedding_dim=doc["segment_age_embedding_dim"],
        history_window=doc["history_window"],
        max_segment_age=doc["max_segment_age"],
        decoder_layers=doc["decoder_layers"],
        input_tokens=tuple(doc["input_tokens"]),
        output_embed_tokens=tuple(doc["output_embed_tokens"]),
        output_gen_tokens=tuple(doc["output_gen_tokens"]),
        anon_types=tuple(doc["anon_types"]),
        seed=doc["seed"],
    )


def save_checkpoint(path, config: ModelConfig, params: ModelParameters, extra: dict | None = None) -> None:
    meta = {
        "version": CHECKPOINT_VERSION,
        "config": _config_to_dict(config),
        "extra": extra or {},
    }
    arrays = {f"param/{name}": t.data for name, t in params.tensors.items()}
    buf = io.BytesIO()
    np.savez_compressed(buf, meta=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8), **arrays)
    with open(path, "wb") as fh:
        fh.write(buf.getvalue())


def load_checkpoint(path) -> tuple[ModelConfig, ModelParameters, dict]:
    with np.load(path) as archive:
        meta = json.loads(bytes(archive["meta"].tobytes()).decode())
        if meta.get("version") != CHECKPOINT_VERSION:
            raise ConfigError(
                f"checkpoint version {meta.get('version')} does not match "
                f"supported version {CHECKPOINT_VERSION}"
            )
        config = config_from_dict(meta["config"])
        expected = parameter_shapes(config)
        tensors = {}
        for name, shape in expected.items():
            arr = archive[f"param/{name}"]
            if tuple(arr.shape) != tuple(shape):
                raise ConfigError(f"parameter {name} has shape {arr.shape}, expected {shape}")
            tensors[name] = Tensor(arr.copy(), requires_grad=True)
    return config, ModelParameters(tensors), meta["extra"]
