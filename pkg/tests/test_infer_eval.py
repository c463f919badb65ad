"""Interaction-level inference and execution-based evaluation."""

import numpy as np
import pytest

from convsql.corpus import CorpusSpec, Utterance, generate_synthetic_corpus
from convsql.infer_eval import evaluate, new_session, predict_interaction, predict_turn
from convsql.infer_eval.metrics import score_prediction
from convsql.neural import ModelConfig, Variant, init_parameters
from convsql.preprocess import DEFAULT_TYPE_PRIORITY, build_entity_dictionary
from convsql.sqlkit import ResultTable
from convsql.training import attach_vocabularies, build_examples


@pytest.fixture(scope="module")
def world():
    interactions, db = generate_synthetic_corpus(CorpusSpec(n_interactions=10, seed=55))
    dictionary = build_entity_dictionary(db, DEFAULT_TYPE_PRIORITY)
    return interactions, db, dictionary


def untrained(variant, interactions, dictionary, **overrides):
    defaults = dict(
        word_embedding_dim=8,
        hidden_dim=12,
        position_embedding_dim=4,
        segment_age_embedding_dim=4,
        seed=9,
    )
    defaults.update(overrides)
    config = ModelConfig.for_variant(variant, **defaults)
    config = attach_vocabularies(config, build_examples(interactions, dictionary, config))
    return config, init_parameters(config)


class TestPredictTurn:
    def test_generation_cap(self, world):
        interactions, db, dictionary = world
        config, params = untrained(Variant.FULL, interactions, dictionary)
        from convsql.neural.net import output_vocabulary

        params["b_out"].data[output_vocabulary(config).end_id] = -1e9
        state = new_session(config, params, dictionary, interactions[0].document_date)
        record = predict_turn(state, interactions[0].turns[0][0], max_tokens=300, database=db)
        assert len(record.anonymized_query) <= 300 + 1  # paren repair may close one
        assert len(record.decisions) <= 300
        assert not record.ended

    def test_default_cap_is_300(self, world):
        interactions, db, dictionary = world
        config, params = untrained(Variant.SEQ2SEQ_0, interactions, dictionary)
        from convsql.neural.net import output_vocabulary

        params["b_out"].data[output_vocabulary(config).end_id] = -1e9
        state = new_session(config, params, dictionary, interactions[0].document_date)
        record = predict_turn(state, interactions[0].turns[0][0], database=db)
        assert len([t for t in record.anonymized_query if True]) >= 300  # ran to the cap

    def test_first_turn_has_no_segments(self, world):
        interactions, db, dictionary = world
        config, params = untrained(Variant.FULL, interactions, dictionary)
        state = new_session(config, params, dictionary, interactions[0].document_date)
        record = predict_turn(state, interactions[0].turns[0][0], database=db)
        assert record.segments_available == 0 and record.segments_used == []

    def test_corrupted_prediction_falls_back(self, world):
        interactions, db, dictionary = world
        config, params = untrained(Variant.FULL, interactions, dictionary)
        interaction = interactions[0]
        state = new_session(config, params, dictionary, interaction.document_date)
        predict_turn(state, Utterance.from_text("show me flights from seattle to boston"),
                     max_tokens=40, database=db)
        # turn-1 prediction of an untrained model will not parse; plant a valid one
        valid = list(interaction.turns[0][1].tokens)
        state.previous_queries[0] = valid
        record2 = predict_turn(state, Utterance.from_text("on american airlines"),
                               max_tokens=40, database=db)
        assert record2.segment_source_turn == 1
        # corrupt the newest stored prediction: extraction walks back to turn 1
        state.previous_queries[1] = ["(", "SELECT", "FROM", "nope"]
        record3 = predict_turn(state, Utterance.from_text("which ones arrive at 7pm"),
                               max_tokens=40, database=db)
        assert record3.segment_source_turn == 1

    def test_gold_mode_uses_gold_stream(self, world):
        interactions, db, dictionary = world
        config, params = untrained(Variant.FULL, interactions, dictionary)
        interaction = next(i for i in interactions if len(i) >= 3)
        records = predict_interaction(config, params, dictionary, interaction,
                                      previous_query_mode="gold", max_tokens=40, database=db)
        for record in records[1:]:
            assert record.segments_available > 0
            assert record.segment_source_turn == record.turn_index - 1

    def test_single_turn_modes_agree(self, world):
        interactions, db, dictionary = world
        config, params = untrained(Variant.FULL, interactions, dictionary)
        single = next(i for i in interactions if len(i) >= 1)
        one_turn = type(single)(
            id=single.id, scenario_id=single.scenario_id,
            document_date=single.document_date, turns=single.turns[:1],
        )
        a = predict_interaction(config, params, dictionary, one_turn, "predicted",
                                max_tokens=40, database=db)
        b = predict_interaction(config, params, dictionary, one_turn, "gold",
                                max_tokens=40, database=db)
        assert a[0].query_tokens == b[0].query_tokens

    def test_deterministic(self, world):
        interactions, db, dictionary = world
        config, params = untrained(Variant.FULL, interactions, dictionary)
        a = predict_interaction(config, params, dictionary, interactions[1], "predicted",
                                max_tokens=40, database=db)
        b = predict_interaction(config, params, dictionary, interactions[1], "predicted",
                                max_tokens=40, database=db)
        assert [r.query_tokens for r in a] == [r.query_tokens for r in b]

    def test_turn_one_is_variant_independent_given_shared_parameters(self, world):
        interactions, db, dictionary = world
        cfg0, params0 = untrained(Variant.SEQ2SEQ_0, interactions, dictionary)
        cfg_h = ModelConfig.for_variant(
            Variant.SEQ2SEQ_H,
            word_embedding_dim=8, hidden_dim=12,
            position_embedding_dim=4, segment_age_embedding_dim=4, seed=9,
        ).with_vocab(cfg0.input_tokens, cfg0.output_embed_tokens, cfg0.output_gen_tokens)
        s0 = new_session(cfg0, params0, dictionary, interactions[0].document_date)
        sh = new_session(cfg_h, params0, dictionary, interactions[0].document_date)
        u = interactions[0].turns[0][0]
        r0 = predict_turn(s0, u, max_tokens=30, database=db)
        rh = predict_turn(sh, u, max_tokens=30, database=db)
        assert r0.query_tokens == rh.query_tokens

    def test_unknown_mode_rejected(self, world):
        interactions, db, dictionary = world
        config, params = untrained(Variant.FULL, interactions, dictionary)
        with pytest.raises(ValueError, match="mode"):
            predict_interaction(config, params, dictionary, interactions[0], "oracle")


class TestScoring:
    def test_identical_prediction_scores_everywhere(self, world):
        interactions, db, _ = world
        _, query = interactions[0].turns[0]
        q, s, r = score_prediction(list(query.tokens), query.all_golds(), db)
        assert q and s and r

    def test_failed_prediction_vs_empty_gold(self, world):
        _, db, _ = world
        golds = (("SELECT", "flight.flight_id", "FROM", "flight", "WHERE",
                  "flight.flight_id", "=", "0"),)
        q, s, r = score_prediction(["SELECT", "FROM"], golds, db)
        assert not q and not s and r

    def test_wrong_but_executable_prediction(self, world):
        interactions, db, _ = world
        golds = (tuple(interactions[0].turns[0][1].tokens),)
        pred = ["SELECT", "DISTINCT", "flight.cost", "FROM", "flight"]
        q, s, r = score_prediction(pred, golds, db)
        assert not q


class TestEvaluate:
    def test_report_shape_and_lattice(self, world):
        interactions, db, dictionary = world
        config, params = untrained(Variant.FULL, interactions, dictionary)
        report = evaluate(interactions[:4], config, params, dictionary, db,
                          mode="predicted", max_tokens=40)
        assert report.relaxed_denotation >= report.strict_denotation
        assert report.n_interactions == 4
        assert sum(report.per_turn_counts.values()) == report.n_utterances
        doc = report.to_json_dict()
        assert set(doc["per_turn_strict"]) == {str(k) for k in report.per_turn_strict}

    def test_turns_past_twenty_pool_into_final_bucket(self, world):
        import datetime as dt

        from convsql.corpus import Interaction, Query

        interactions, db, dictionary = world
        config, params = untrained(Variant.SEQ2SEQ_0, interactions, dictionary)
        utt, query = interactions[0].turns[0]
        long_interaction = Interaction(
            id="long", scenario_id="s", document_date=dt.date(1993, 2, 3),
            turns=tuple((utt, query) for _ in range(23)),
        )
        report = evaluate([long_interaction], config, params, dictionary, db,
                          mode="predicted", max_tokens=8)
        assert max(report.per_turn_counts) == 20
        assert report.per_turn_counts[20] == 4  # turns 20..23 pooled

    def test_plots_render(self, world, tmp_path):
        interactions, db, dictionary = world
        config, params = untrained(Variant.FULL, interactions, dictionary)
        report = evaluate(interactions[:2], config, params, dictionary, db,
                          mode="predicted", max_tokens=30)
        from convsql.infer_eval import plot_history_sweep, plot_per_turn_curve

        plot_per_turn_curve({"full": report.to_json_dict()}, tmp_path / "curve.png")
        plot_history_sweep({"full": {0: 0.5, 3: 0.6}}, tmp_path / "sweep.png")
        assert (tmp_path / "curve.png").stat().st_size > 0
        assert (tmp_path / "sweep.png").stat().st_size > 0
