"""Command-line entry point: corpus generation through serving.

Every flag can also come from a JSON --config file (flat keys named like the
flags); explicit flags win. Exit codes: 0 success, 1 usage error, 2 data or
runtime error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .corpus import (
    CorpusError,
    CorpusSpec,
    Database,
    generate_synthetic_corpus,
    load_interactions,
    save_interactions,
)
from .corpus.jsonl import interaction_to_record
from .neural import ConfigError, ModelConfig, Variant, load_checkpoint, save_checkpoint
from .preprocess import (
    DEFAULT_TYPE_PRIORITY,
    AnonymizationMapping,
    EntityDictionary,
    anonymize_query,
    anonymize_utterance,
    build_entity_dictionary,
)
from .training import TrainConfig, TrainingDiverged, train


class UsageError(ValueError):
    pass


def _data_dir() -> Path:
    return Path(os.environ.get("CONVSQL_DATA_DIR", "."))


def _load_config_file(path: str | None, ns: argparse.Namespace):
    """Merge config-file values under explicit flags; unknown keys are rejected."""
    if path is None:
        return {}
    with open(path) as fh:
        doc = json.load(fh)
    known = set(vars(ns)) - {"config", "func", "command"}
    unknown = set(doc) - known
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    return doc


MODEL_FLAG_FIELDS = (
    "word_embedding_dim",
    "hidden_dim",
    "position_embedding_dim",
    "segment_age_embedding_dim",
    "max_segment_age",
)
TRAIN_FLAG_FIELDS = (
    "learning_rate",
    "batch_size",
    "initial_patience",
    "patience_multiplier",
    "lr_decay",
    "dropout",
    "max_gold_tokens",
    "validation_fraction",
    "max_epochs",
)


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--variant", choices=[v.value for v in Variant], default="full")
    p.add_argument("--h", dest="history_window", type=int, default=None,
                   help="history window (defaults to the variant's convention)")
    p.add_argument("--g", dest="max_segment_age", type=int, default=4)
    p.add_argument("--word-embedding-dim", type=int, default=400)
    p.add_argument("--hidden-dim", type=int, default=800)
    p.add_argument("--position-embedding-dim", type=int, default=50)
    p.add_argument("--segment-age-embedding-dim", type=int, default=64)


def _model_config(ns: argparse.Namespace) -> ModelConfig:
    overrides = {f: getattr(ns, f) for f in MODEL_FLAG_FIELDS}
    if ns.history_window is not None:
        overrides["history_window"] = ns.history_window
    return ModelConfig.for_variant(ns.variant, seed=ns.seed, **overrides)


def cmd_gen_corpus(ns: argparse.Namespace) -> int:
    weights = json.loads(ns.phenomenon_weights) if ns.phenomenon_weights else None
    spec_kwargs = dict(
        n_interactions=ns.n,
        turn_length_distribution={"mean": ns.turn_mean, "max": ns.turn_max},
        seed=ns.seed,
    )
    if weights:
        spec_kwargs["phenomenon_weights"] = weights
    interactions, database = generate_synthetic_corpus(CorpusSpec(**spec_kwargs))
    out = Path(ns.out)
    out.mkdir(parents=True, exist_ok=True)
    save_interactions(interactions, out / "interactions.jsonl")
    database.save(out / "database.json")
    print(f"wrote {len(interactions)} interactions to {out / 'interactions.jsonl'}")
    return 0


def cmd_preprocess(ns: argparse.Namespace) -> int:
    interactions = load_interactions(ns.data)
    database = Database.load(ns.database)
    dictionary = build_entity_dictionary(database, DEFAULT_TYPE_PRIORITY)
    out = Path(ns.out)
    out.mkdir(parents=True, exist_ok=True)
    dictionary.save(out / "dictionary.json")
    with open(out / "anonymized.jsonl", "w") as fh:
        for interaction in interactions:
            mapping = AnonymizationMapping()
            record = interaction_to_record(interaction)
            anon_turns = []
            for (utt, query), turn_doc in zip(interaction.turns, record["turns"]):
                anon_u, mapping = anonymize_utterance(
                    utt, dictionary, interaction.document_date, mapping
                )
                anon_q = anonymize_query(query.shortest_gold(), mapping)
                anon_turns.append({"utterance": " ".join(anon_u), "sql": " ".join(anon_q)})
            record["anonymized_turns"] = anon_turns
            record["anonymization"] = mapping.to_json_dict()
            fh.write(json.dumps(record) + "\n")
    print(f"wrote {out / 'dictionary.json'} and {out / 'anonymized.jsonl'}")
    return 0


def cmd_train(ns: argparse.Namespace) -> int:
    interactions = load_interactions(ns.data)
    database = Database.load(ns.database)
    dictionary = build_entity_dictionary(database, DEFAULT_TYPE_PRIORITY)
    model_config = _model_config(ns)
    train_config = TrainConfig(seed=ns.seed, **{f: getattr(ns, f) for f in TRAIN_FLAG_FIELDS})
    out = Path(ns.out)
    out.mkdir(parents=True, exist_ok=True)
    log_path = out / "train_log.jsonl"
    with open(log_path, "w") as log_fh:
        def sink(record):
            log_fh.write(json.dumps(record.log_dict()) + "\n")
            log_fh.flush()
            if not ns.quiet:
                print(
                    f"epoch {record.epoch}: lr={record.lr:.6f} "
                    f"val_token_acc={record.val_token_acc:.3f} "
                    f"val_string_acc={record.val_string_acc:.3f}"
                )

        result = train(interactions, dictionary, model_config, train_config, log_sink=sink)
    save_checkpoint(
        out / "checkpoint.npz",
        result.config,
        result.params,
        extra={
            "best_epoch": result.best_epoch,
            "stopped_epoch": result.stopped_epoch,
            "train_seed": train_config.seed,
        },
    )
    print(f"wrote {out / 'checkpoint.npz'} (best epoch {result.best_epoch})")
    return 0


def cmd_evaluate(ns: argparse.Namespace) -> int:
    from .infer_eval import evaluate, plot_history_sweep, plot_per_turn_curve

    config, params, _ = load_checkpoint(ns.checkpoint)
    interactions = load_interactions(ns.data)
    database = Database.load(ns.database)
    dictionary = build_entity_dictionary(database, DEFAULT_TYPE_PRIORITY)
    report = evaluate(
        interactions, config, params, dictionary, database,
        mode=ns.mode, max_tokens=ns.max_tokens,
    )
    out = Path(ns.out)
    out.mkdir(parents=True, exist_ok=True)
    doc = report.to_json_dict()
    doc["metadata"] = {
        "variant": config.variant.value,
        "history_window": config.history_window,
        "checkpoint": str(ns.checkpoint),
        "mode": ns.mode,
    }
    report_path = out / "report.json"
    with open(report_path, "w") as fh:
        json.dump(doc, fh, indent=1)

    series = {f"{config.variant.value} ({ns.mode})": doc}
    sweep: dict[str, dict[int, float]] = {}
    for item in ns.compare or []:
        label, _, path = item.partition("=")
        if not path:
            raise UsageError("--compare expects label=path/to/report.json")
        with open(path) as fh:
            other = json.load(fh)
        series[label] = other
        meta = other.get("metadata", {})
        sweep.setdefault(meta.get("variant", label), {})[meta.get("history_window", 0)] = other[
            "strict_denotation"
        ]
    plot_per_turn_curve(series, out / "per_turn.png")
    if sweep:
        sweep.setdefault(config.variant.value, {})[config.history_window] = report.strict_denotation
        plot_history_sweep(sweep, out / "history_sweep.png")
    print(
        f"query={report.query_accuracy:.3f} strict={report.strict_denotation:.3f} "
        f"relaxed={report.relaxed_denotation:.3f} -> {report_path}"
    )
    return 0


def cmd_predict(ns: argparse.Namespace) -> int:
    from .infer_eval import predict_interaction

    config, params, _ = load_checkpoint(ns.checkpoint)
    interactions = load_interactions(ns.data)
    database = Database.load(ns.database)
    dictionary = build_entity_dictionary(database, DEFAULT_TYPE_PRIORITY)
    out_path = Path(ns.out) if ns.out else None
    fh = open(out_path, "w") if out_path else sys.stdout
    try:
        for interaction in interactions:
            records = predict_interaction(
                config, params, dictionary, interaction,
                previous_query_mode=ns.mode, max_tokens=ns.max_tokens, database=database,
            )
            for record in records:
                fh.write(
                    json.dumps(
                        {
                            "interaction": interaction.id,
                            "turn": record.turn_index,
                            "sql": " ".join(record.query_tokens),
                            "segments_used": record.segments_used,
                        }
                    )
                    + "\n"
                )
    finally:
        if out_path:
            fh.close()
    return 0


def cmd_serve(ns: argparse.Namespace) -> int:
    import uvicorn

    from .service import build_app

    app = build_app(
        checkpoint_path=ns.checkpoint,
        database_path=ns.database,
        default_date=ns.default_date,
        ui_dir=ns.ui_dir,
    )
    uvicorn.run(app, host=ns.host, port=ns.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="convsql", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="JSON config file with flag defaults")
        p.add_argument("--seed", type=int, default=1)

    p = sub.add_parser("gen-corpus", help="generate a synthetic corpus and database")
    common(p)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--turn-mean", type=float, default=7.0)
    p.add_argument("--turn-max", type=int, default=16)
    p.add_argument("--phenomenon-weights", default=None, help="JSON object of weights")
    p.add_argument("--out", default=str(_data_dir() / "corpus"))
    p.set_defaults(func=cmd_gen_corpus)

    p = sub.add_parser("preprocess", help="build the entity dictionary and anonymized cache")
    common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--database", required=True)
    p.add_argument("--out", default=str(_data_dir() / "preprocessed"))
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("train", help="train a model")
    common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--database", required=True)
    p.add_argument("--out", default=str(_data_dir() / "run"))
    p.add_argument("--quiet", action="store_true")
    _add_model_flags(p)
    p.add_argument("--learning-rate", type=float, default=0.001)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--initial-patience", type=float, default=10.0)
    p.add_argument("--patience-multiplier", type=float, default=1.01)
    p.add_argument("--lr-decay", type=float, default=0.8)
    p.add_argument("--dropout", type=float, default=0.5)
    p.add_argument("--max-gold-tokens", type=int, default=200)
    p.add_argument("--validation-fraction", type=float, default=0.05)
    p.add_argument("--max-epochs", type=int, default=100)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a checkpoint and emit report + plots")
    common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--database", required=True)
    p.add_argument("--mode", choices=["predicted", "gold"], default="predicted")
    p.add_argument("--max-tokens", type=int, default=300)
    p.add_argument("--compare", action="append", default=None,
                   help="label=report.json to overlay on the plots (repeatable)")
    p.add_argument("--out", default=str(_data_dir() / "eval"))
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="predict queries for an interaction file")
    common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--database", required=True)
    p.add_argument("--mode", choices=["predicted", "gold"], default="predicted")
    p.add_argument("--max-tokens", type=int, default=300)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("serve", help="start the interactive session service")
    common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--database", required=True)
    p.add_argument("--default-date", default="1993-02-03")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--ui-dir", default=None, help="static frontend bundle to serve at /ui")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        config_values = _load_config_file(ns.config, ns)
        for key, value in config_values.items():
            flag = "--" + key.replace("_", "-")
            if not any(a == flag or a.startswith(flag + "=") for a in argv):
                setattr(ns, key, value)
        return ns.func(ns)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (CorpusError, ConfigError, TrainingDiverged, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
