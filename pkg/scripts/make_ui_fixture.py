"""Build frontend/test/fixture.json by replaying the canonical 4-utterance
conversation against a freshly trained small checkpoint, via the real service.

Run from the repository root:  python3 scripts/make_ui_fixture.py
"""

import json
import sys
import time
from pathlib import Path

from fastapi.testclient import TestClient

from convsql.corpus import CorpusSpec, generate_synthetic_corpus
from convsql.neural import ModelConfig, Variant
from convsql.preprocess import DEFAULT_TYPE_PRIORITY, build_entity_dictionary
from convsql.service import build_app
from convsql.training import TrainConfig, train

UTTERANCES = [
    "show me flights from seattle to boston next monday",
    "on american airlines",
    "which ones arrive at 7pm",
    "show me delta air lines flights instead",
]


def main() -> int:
    t0 = time.time()
    interactions, db = generate_synthetic_corpus(
        CorpusSpec(n_interactions=16, turn_length_distribution={"mean": 5.0, "max": 8}, seed=900)
    )
    dictionary = build_entity_dictionary(db, DEFAULT_TYPE_PRIORITY)
    model_config = ModelConfig.for_variant(
        Variant.FULL,
        word_embedding_dim=48,
        hidden_dim=96,
        position_embedding_dim=8,
        segment_age_embedding_dim=8,
        seed=10,
    )
    train_config = TrainConfig(
        validation_fraction=0.0, max_epochs=80, dropout=0.0, learning_rate=0.002, seed=10
    )
    result = train(
        interactions,
        dictionary,
        model_config,
        train_config,
        log_sink=lambda r: print(
            f"epoch {r.epoch}: tok {r.val_token_acc:.3f} str {r.val_string_acc:.3f}", flush=True
        ),
        stop_when=lambda r: r.val_token_acc >= 0.99 and r.val_string_acc >= 0.9,
    )
    print(f"trained in {time.time() - t0:.0f}s")

    client = TestClient(build_app(preloaded=(result.config, result.params, db)))
    session = client.post("/sessions", json={"date": "1993-02-03"}).json()
    turns = []
    for text in UTTERANCES:
        response = client.post(
            f"/sessions/{session['session_id']}/utterances", json={"text": text}
        )
        response.raise_for_status()
        turns.append(response.json())
        print(f"turn {len(turns)}: {' '.join(turns[-1]['sql']['tokens'])[:100]}")

    copied_spans = [
        [s for s in turn["provenance"] if s["source_turn"] is not None] for turn in turns
    ]
    assert len(turns) == 4, "expected four turns"
    assert not copied_spans[0], "turn 1 must not contain copied spans"
    assert any(copied_spans[1:]), "a later turn must contain a copied span"
    for turn in turns:
        assert turn["attention"]["steps"], "each turn carries attention rows"
        for row in turn["attention"]["steps"]:
            assert len(row) == len(turn["attention"]["tokens"])

    out = Path(__file__).resolve().parents[1] / "frontend" / "test" / "fixture.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps({"turns": turns}, indent=1))
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
