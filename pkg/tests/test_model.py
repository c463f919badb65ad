"""Model architecture tests: encoding, attention, output families, gradients."""

import numpy as np
import pytest

import convsql.neural.autograd as ag
from convsql.neural import (
    ModelConfig,
    ModelParameters,
    Variant,
    build_vocabularies,
    init_parameters,
    load_checkpoint,
    parameter_shapes,
    save_checkpoint,
)
from convsql.neural import net
from convsql.neural.autograd import Tensor
from convsql.neural.config import ConfigError
from convsql.neural.net import input_vocabulary, output_vocabulary
from convsql.neural.runtime import (
    greedy_decode,
    prepare_turn,
    teacher_forced_turn,
)
from convsql.sqlkit.segments import Segment, SegmentSet

U1 = "show me from CITY#1 to CITY#2".split()
TARGET1 = "( SELECT f.a FROM flight WHERE ( f.a = CITY#1 ) AND ( f.a = CITY#2 ) )".split()
U2 = "on AIRLINE#1".split()
TARGET2 = ["(", "SELECT", "f.a", "FROM", "flight", "WHERE", "SEGMENT#1", "AND",
           "(", "f.a", "=", "AIRLINE#1", ")", ")"]


def tiny_config(variant=Variant.FULL, **overrides) -> ModelConfig:
    defaults = dict(
        word_embedding_dim=6,
        hidden_dim=8,
        position_embedding_dim=3,
        segment_age_embedding_dim=4,
        max_segment_age=2,
        seed=5,
    )
    defaults.update(overrides)
    cfg = ModelConfig.for_variant(variant, **defaults)
    counts = {"show": 5, "me": 5, "from": 5, "to": 5, "on": 3, "CITY#1": 4, "CITY#2": 4, "AIRLINE#1": 2}
    targets = set(TARGET1) | {"flight"}
    iv, ov = build_vocabularies(counts, targets, cfg.anon_types, cfg.variant.anon_scoring)
    return cfg.with_vocab(iv.tokens, ov.embed_tokens, ov.gen_tokens)


def build_model(variant=Variant.FULL, **overrides):
    cfg = tiny_config(variant, **overrides)
    params = init_parameters(cfg)
    return cfg, params, input_vocabulary(cfg), output_vocabulary(cfg)


def run_two_turns(cfg, params, in_vocab, out_vocab, dropout_rng=None, dropout_p=0.0):
    """Teacher-forced interaction exercising every parameter family."""
    disc = net.initial_discourse(params) if cfg.variant.turn_level else None
    t1 = prepare_turn(params, cfg, in_vocab, U1, 1, [], [], disc, out_vocab=out_vocab)
    r1 = teacher_forced_turn(t1, TARGET1, params, cfg, out_vocab,
                             dropout_rng=dropout_rng, dropout_p=dropout_p)
    segments = SegmentSet(
        turn_index=2,
        segments=(Segment(a=1, b=1, l=7, r=12, tokens=tuple(TARGET1[6:12])),),
    ) if cfg.variant.segment_copying else None
    t2 = prepare_turn(
        params, cfg, in_vocab, U2, 2, [U1], [t1.encoded], t1.discourse,
        segments=segments, source_query=TARGET1, out_vocab=out_vocab,
    )
    target2 = TARGET2 if cfg.variant.segment_copying else TARGET1
    r2 = teacher_forced_turn(t2, target2, params, cfg, out_vocab,
                             dropout_rng=dropout_rng, dropout_p=dropout_p)
    log_probs = r1.log_probs + r2.log_probs
    losses = [ag.scale(lp, -1.0) for lp in log_probs]
    return ag.scale(ag.add_scalars(losses), 1.0 / len(losses)), (r1, r2, t1, t2)


class TestConfig:
    def test_published_shapes_are_internally_consistent(self):
        cfg = ModelConfig.for_variant(Variant.FULL)
        counts, targets = {"a": 5}, {"b"}
        iv, ov = build_vocabularies(counts, targets, cfg.anon_types, True)
        cfg = cfg.with_vocab(iv.tokens, ov.embed_tokens, ov.gen_tokens)
        shapes = parameter_shapes(cfg)
        assert shapes["w_att"] == (850, 800)
        assert shapes["w_m"] == (1650, 800)
        assert shapes["w_seg"] == (800, 1600)
        assert shapes["pos_emb"] == (3, 50)

    def test_odd_hidden_rejected(self):
        with pytest.raises(ConfigError):
            ModelConfig.for_variant(Variant.FULL, hidden_dim=9)

    def test_variant_flags(self):
        assert Variant.FULL.turn_level and Variant.FULL.segment_copying
        assert Variant.S2S_ANON.anon_scoring and not Variant.S2S_ANON.turn_level
        assert not Variant.SEQ2SEQ_H.anon_scoring
        assert Variant.SEQ2SEQ_0.default_history == 0 and Variant.FULL_0.default_history == 0

    def test_init_range(self):
        _, params, _, _ = build_model()
        for name in params.tensors:
            assert np.abs(params[name].data).max() <= 0.1


class TestEncoder:
    def test_single_token_gives_single_state_and_decoder_init(self):
        cfg, params, in_vocab, _ = build_model(Variant.SEQ2SEQ_0)
        enc = net.encode_utterance(["show"], params, cfg, in_vocab)
        assert enc.states.shape == (1, cfg.hidden_dim)
        state = net.init_decoder_state(enc, cfg)
        np.testing.assert_array_equal(state.layers[0][0].data, enc.states.data[0])

    def test_discourse_state_changes_encoding(self):
        cfg, params, in_vocab, _ = build_model(Variant.FULL)
        d0 = net.initial_discourse(params)
        enc0 = net.encode_utterance(U1, params, cfg, in_vocab, discourse=d0)
        shifted = net.DiscourseState(h=Tensor(d0.h.data + 0.3), c=d0.c)
        enc1 = net.encode_utterance(U1, params, cfg, in_vocab, discourse=shifted)
        assert not np.allclose(enc0.states.data, enc1.states.data)

    def test_placeholder_indices_share_type_embedding(self):
        cfg, params, in_vocab, _ = build_model(Variant.FULL)
        assert in_vocab.embed_id("CITY#1") == in_vocab.embed_id("CITY#2")
        enc1 = net.encode_utterance(["CITY#1"], params, cfg, in_vocab,
                                    discourse=net.initial_discourse(params))
        enc2 = net.encode_utterance(["CITY#2"], params, cfg, in_vocab,
                                    discourse=net.initial_discourse(params))
        np.testing.assert_array_equal(enc1.states.data, enc2.states.data)

    def test_seq2seq_variants_keep_indexed_placeholders(self):
        _, _, in_vocab, _ = build_model(Variant.SEQ2SEQ_H)
        assert in_vocab.embed_id("CITY#1") != in_vocab.embed_id("CITY#2")


class TestDiscourse:
    def test_update_is_deterministic(self):
        cfg, params, in_vocab, _ = build_model(Variant.FULL)
        enc = net.encode_utterance(U1, params, cfg, in_vocab, discourse=net.initial_discourse(params))
        a = net.update_discourse(net.initial_discourse(params), enc, params)
        b = net.update_discourse(net.initial_discourse(params), enc, params)
        np.testing.assert_array_equal(a.h.data, b.h.data)

    def test_update_moves_state(self):
        cfg, params, in_vocab, _ = build_model(Variant.FULL)
        d0 = net.initial_discourse(params)
        enc = net.encode_utterance(U1, params, cfg, in_vocab, discourse=d0)
        d1 = net.update_discourse(d0, enc, params)
        assert not np.allclose(d0.h.data, d1.h.data)

    def test_zero_parameter_gate_identities(self):
        cfg, params, in_vocab, _ = build_model(Variant.FULL)
        for name in ("disc_w", "disc_u", "disc_b"):
            params[name].data[:] = 0.0
        d_prev = net.DiscourseState(h=Tensor(np.zeros(cfg.hidden_dim)),
                                    c=Tensor(np.ones(cfg.hidden_dim)))
        enc = net.encode_utterance(U1, params, cfg, in_vocab, discourse=d_prev)
        d1 = net.update_discourse(d_prev, enc, params)
        np.testing.assert_allclose(d1.c.data, 0.5)  # f=0.5 gate on c_prev=1
        np.testing.assert_allclose(d1.h.data, 0.5 * np.tanh(0.5))


def single_step(cfg, params, in_vocab, out_vocab, segments=None, source=None):
    disc = net.initial_discourse(params) if cfg.variant.turn_level else None
    inputs = prepare_turn(params, cfg, in_vocab, U1, 1, [], [], disc,
                          segments=segments, source_query=source, out_vocab=out_vocab)
    step, _ = net.decoder_step(
        net.start_embedding(params, out_vocab), inputs.dec_init, inputs.attend,
        params, cfg, segment_vectors=inputs.seg_vectors,
    )
    return step, inputs


class TestAttention:
    def test_single_position_takes_all_mass(self):
        cfg, params, in_vocab, out_vocab = build_model(Variant.SEQ2SEQ_0)
        disc = None
        inputs = prepare_turn(params, cfg, in_vocab, ["show"], 1, [], [], disc, out_vocab=out_vocab)
        step, _ = net.decoder_step(net.start_embedding(params, out_vocab),
                                   inputs.dec_init, inputs.attend, params, cfg)
        np.testing.assert_allclose(step.alpha.data, [1.0])
        np.testing.assert_allclose(step.context.data, inputs.attend.matrix.data[0])

    def test_equal_scores_give_uniform_alpha(self):
        cfg, params, in_vocab, out_vocab = build_model(Variant.FULL)
        params["w_att"].data[:] = 0.0
        step, _ = single_step(cfg, params, in_vocab, out_vocab)
        np.testing.assert_allclose(step.alpha.data, 1.0 / len(U1))

    def test_closed_form_two_position_softmax(self):
        scores = Tensor(np.array([np.log(3.0), np.log(1.0)]))
        alpha = ag.masked_softmax(scores, np.array([True, True]))
        np.testing.assert_allclose(alpha.data, [0.75, 0.25])

    def test_alpha_sums_to_one(self):
        cfg, params, in_vocab, out_vocab = build_model(Variant.FULL)
        step, _ = single_step(cfg, params, in_vocab, out_vocab)
        assert abs(step.alpha.data.sum() - 1.0) < 1e-6

    def test_delimiters_get_zero_mass(self):
        cfg, params, in_vocab, out_vocab = build_model(Variant.S2S_ANON)
        disc = None
        inputs = prepare_turn(params, cfg, in_vocab, U2, 2, [U1], [], disc, out_vocab=out_vocab)
        delim_rows = [i for i, (_, tok) in enumerate(inputs.attend.positions) if tok == "<delim>"]
        assert delim_rows
        step, _ = net.decoder_step(net.start_embedding(params, out_vocab),
                                   inputs.dec_init, inputs.attend, params, cfg)
        assert all(step.alpha.data[r] == 0.0 for r in delim_rows)

    def test_history_window_zero_attends_current_only(self):
        cfg, params, in_vocab, out_vocab = build_model(Variant.FULL_0)
        disc = net.initial_discourse(params)
        t1 = prepare_turn(params, cfg, in_vocab, U1, 1, [], [], disc, out_vocab=out_vocab)
        t2 = prepare_turn(params, cfg, in_vocab, U2, 2, [U1], [t1.encoded], t1.discourse,
                          out_vocab=out_vocab)
        assert [tok for _, tok in t2.attend.positions] == U2


class TestOutputDistribution:
    def test_distribution_sums_to_one(self):
        cfg, params, in_vocab, out_vocab = build_model(Variant.FULL)
        seg = Segment(a=1, b=1, l=7, r=12, tokens=tuple(TARGET1[6:12]))
        step, _ = single_step(cfg, params, in_vocab, out_vocab,
                              segments=SegmentSet(turn_index=1, segments=(seg,)),
                              source=TARGET1)
        assert abs(np.exp(step.log_probs.data).sum() - 1.0) < 1e-5

    def test_all_zero_scores_give_uniform_over_families(self):
        # Each placeholder in U1 occurs once, so with zeroed score parameters
        # every outcome in every family has unnormalized score exp(0) = 1.
        cfg, params, in_vocab, out_vocab = build_model(Variant.FULL)
        for name in ("w_att", "w_out", "b_out", "w_seg"):
            params[name].data[:] = 0.0
        seg = Segment(a=1, b=1, l=7, r=12, tokens=tuple(TARGET1[6:12]))
        step, _ = single_step(cfg, params, in_vocab, out_vocab,
                              segments=SegmentSet(turn_index=1, segments=(seg,)),
                              source=TARGET1)
        n_outcomes = step.n_gen + len(step.anon_tokens) + step.n_segments
        assert step.n_segments == 1 and len(step.anon_tokens) == 2
        np.testing.assert_allclose(np.exp(step.log_probs.data), 1.0 / n_outcomes)

    def test_multi_occurrence_placeholder_sums_attention_terms(self):
        cfg, params, in_vocab, out_vocab = build_model(Variant.FULL)
        params["w_att"].data[:] = 0.0  # every attention score is 0
        disc = net.initial_discourse(params)
        inputs = prepare_turn(params, cfg, in_vocab,
                              "CITY#1 to CITY#1 and CITY#2".split(), 1, [], [], disc,
                              out_vocab=out_vocab)
        step, _ = net.decoder_step(net.start_embedding(params, out_vocab),
                                   inputs.dec_init, inputs.attend, params, cfg)
        i1 = step.n_gen + step.anon_tokens.index("CITY#1")
        i2 = step.n_gen + step.anon_tokens.index("CITY#2")
        # CITY#1 occurs twice: its unnormalized score is exp(0)+exp(0)
        ratio = np.exp(step.log_probs.data[i1]) / np.exp(step.log_probs.data[i2])
        assert ratio == pytest.approx(2.0)

    def test_absent_placeholder_cannot_be_generated(self):
        cfg, params, in_vocab, out_vocab = build_model(Variant.FULL)
        step, _ = single_step(cfg, params, in_vocab, out_vocab)
        assert "AIRLINE#1" not in step.anon_tokens
        assert out_vocab.gen_id("AIRLINE#1") is None

    def test_variant_containment_bitwise(self):
        # With no segments and no placeholders in scope, the joint distribution
        # is exactly the softmax of the vocabulary projection.
        cfg, params, in_vocab, out_vocab = build_model(Variant.FULL)
        disc = net.initial_discourse(params)
        inputs = prepare_turn(params, cfg, in_vocab, ["show", "me"], 1, [], [], disc,
                              out_vocab=out_vocab)
        step, _ = net.decoder_step(net.start_embedding(params, out_vocab),
                                   inputs.dec_init, inputs.attend, params, cfg)
        direct = ag.log_softmax(ag.add(ag.matmul(step.m, params["w_out"]), params["b_out"]))
        np.testing.assert_array_equal(step.log_probs.data, direct.data)

    def test_index_permutation_neutrality(self):
        # Swapping CITY#1 and CITY#2 everywhere permutes their probabilities
        # and leaves all other outcomes untouched.
        cfg, params, in_vocab, out_vocab = build_model(Variant.FULL)
        disc = net.initial_discourse(params)
        swap = {"CITY#1": "CITY#2", "CITY#2": "CITY#1"}
        u = U1
        u_swapped = [swap.get(t, t) for t in u]
        s1, _ = net.decoder_step(
            net.start_embedding(params, out_vocab),
            (i1 := prepare_turn(params, cfg, in_vocab, u, 1, [], [], disc, out_vocab=out_vocab)).dec_init,
            i1.attend, params, cfg,
        )
        s2, _ = net.decoder_step(
            net.start_embedding(params, out_vocab),
            (i2 := prepare_turn(params, cfg, in_vocab, u_swapped, 1, [], [], disc, out_vocab=out_vocab)).dec_init,
            i2.attend, params, cfg,
        )
        np.testing.assert_array_equal(s1.log_probs.data[: s1.n_gen], s2.log_probs.data[: s2.n_gen])
        p1 = {t: s1.log_probs.data[s1.n_gen + i] for i, t in enumerate(s1.anon_tokens)}
        p2 = {t: s2.log_probs.data[s2.n_gen + i] for i, t in enumerate(s2.anon_tokens)}
        assert p1["CITY#1"] == p2["CITY#2"] and p1["CITY#2"] == p2["CITY#1"]


class TestEmbedOutput:
    def test_single_token_segment_equals_token_embedding(self):
        cfg, params, _, out_vocab = build_model(Variant.FULL)
        seg = Segment(a=1, b=1, l=2, r=2, tokens=("SELECT",))
        segs = SegmentSet(turn_index=2, segments=(seg,))
        emb = net.embed_output(0, segs, params, out_vocab)
        np.testing.assert_array_equal(emb.data, params["emb_out"].data[out_vocab.embed_id("SELECT")])

    def test_type_collapse_mean_identity(self):
        cfg, params, _, out_vocab = build_model(Variant.FULL)
        seg = Segment(a=1, b=1, l=1, r=2, tokens=("CITY#1", "CITY#2"))
        segs = SegmentSet(turn_index=2, segments=(seg,))
        emb = net.embed_output(0, segs, params, out_vocab)
        np.testing.assert_allclose(emb.data, params["emb_out"].data[out_vocab.embed_id("CITY#1")])

    def test_mean_of_four_tokens(self):
        cfg, params, _, out_vocab = build_model(Variant.FULL)
        tokens = ("SELECT", "FROM", "WHERE", "AND")
        seg = Segment(a=1, b=1, l=1, r=4, tokens=tokens)
        segs = SegmentSet(turn_index=2, segments=(seg,))
        emb = net.embed_output(0, segs, params, out_vocab)
        expected = np.mean(
            [params["emb_out"].data[out_vocab.embed_id(t)] for t in tokens], axis=0
        )
        np.testing.assert_allclose(emb.data, expected)


class TestSegmentEncoder:
    def test_whole_query_segment_uses_first_and_last_states(self):
        cfg, params, _, out_vocab = build_model(Variant.FULL)
        seg = Segment(a=1, b=1, l=1, r=len(TARGET1), tokens=tuple(TARGET1))
        segs = SegmentSet(turn_index=2, segments=(seg,))
        vecs = net.encode_segments(TARGET1, segs, 2, params, cfg, out_vocab)
        assert vecs.shape == (1, 2 * cfg.hidden_dim)

    def test_ages_past_cap_share_embedding(self):
        cfg, params, _, out_vocab = build_model(Variant.FULL)  # cap g=2
        seg_old = Segment(a=1, b=9, l=1, r=2, tokens=("SELECT", "FROM"))
        seg_older = Segment(a=5, b=9, l=1, r=2, tokens=("SELECT", "FROM"))
        v1 = net.encode_segments(["SELECT", "FROM"], SegmentSet(turn_index=10, segments=(seg_old,)),
                                 10, params, cfg, out_vocab)
        v2 = net.encode_segments(["SELECT", "FROM"], SegmentSet(turn_index=10, segments=(seg_older,)),
                                 10, params, cfg, out_vocab)
        np.testing.assert_array_equal(v1.data, v2.data)

    def test_age_indexing_arithmetic(self):
        cfg, params, _, out_vocab = build_model(Variant.FULL)
        age_dim = cfg.segment_age_embedding_dim
        seg_now = Segment(a=2, b=2, l=1, r=2, tokens=("SELECT", "FROM"))
        v = net.encode_segments(["SELECT", "FROM"], SegmentSet(turn_index=3, segments=(seg_now,)),
                                3, params, cfg, out_vocab)
        np.testing.assert_array_equal(v.data[0][-age_dim:], params["age_emb"].data[1])


class TestDecoderRecurrence:
    def test_first_step_uses_zero_context(self):
        cfg, params, in_vocab, out_vocab = build_model(Variant.FULL)
        disc = net.initial_discourse(params)
        inputs = prepare_turn(params, cfg, in_vocab, U1, 1, [], [], disc, out_vocab=out_vocab)
        assert np.all(inputs.dec_init.context.data == 0.0)
        assert inputs.dec_init.context.shape == (cfg.context_dim,)

    def test_state_evolves_with_identical_inputs(self):
        cfg, params, in_vocab, out_vocab = build_model(Variant.FULL)
        disc = net.initial_discourse(params)
        inputs = prepare_turn(params, cfg, in_vocab, U1, 1, [], [], disc, out_vocab=out_vocab)
        emb = net.start_embedding(params, out_vocab)
        s1, state1 = net.decoder_step(emb, inputs.dec_init, inputs.attend, params, cfg)
        s2, _ = net.decoder_step(emb, state1, inputs.attend, params, cfg)
        assert not np.allclose(s1.m.data, s2.m.data)

    def test_full_with_no_segments_matches_anon_scoring_form(self):
        cfg, params, in_vocab, out_vocab = build_model(Variant.FULL)
        disc = net.initial_discourse(params)
        inputs = prepare_turn(params, cfg, in_vocab, U1, 1, [], [], disc, out_vocab=out_vocab)
        with_none, _ = net.decoder_step(net.start_embedding(params, out_vocab),
                                        inputs.dec_init, inputs.attend, params, cfg,
                                        segment_vectors=None)
        empty = SegmentSet(turn_index=1)
        inputs2 = prepare_turn(params, cfg, in_vocab, U1, 1, [], [], disc,
                               segments=empty, out_vocab=out_vocab)
        with_empty, _ = net.decoder_step(net.start_embedding(params, out_vocab),
                                         inputs2.dec_init, inputs2.attend, params, cfg,
                                         segment_vectors=inputs2.seg_vectors)
        np.testing.assert_array_equal(with_none.log_probs.data, with_empty.log_probs.data)


class TestGreedyDecode:
    def test_cap_is_respected_without_end(self):
        cfg, params, in_vocab, out_vocab = build_model(Variant.FULL)
        params["b_out"].data[out_vocab.end_id] = -1e9  # end token unreachable
        disc = net.initial_discourse(params)
        inputs = prepare_turn(params, cfg, in_vocab, U1, 1, [], [], disc, out_vocab=out_vocab)
        out = greedy_decode(inputs, params, cfg, out_vocab, max_tokens=40)
        assert len(out.tokens) == 40 and not out.ended

    def test_deterministic(self):
        cfg, params, in_vocab, out_vocab = build_model(Variant.FULL)
        disc = net.initial_discourse(params)
        inputs = prepare_turn(params, cfg, in_vocab, U1, 1, [], [], disc, out_vocab=out_vocab)
        a = greedy_decode(inputs, params, cfg, out_vocab)
        b = greedy_decode(inputs, params, cfg, out_vocab)
        assert a.tokens == b.tokens and a.decisions == b.decisions

    def test_segment_choice_expands_tokens(self):
        cfg, params, in_vocab, out_vocab = build_model(Variant.FULL)
        seg = Segment(a=1, b=1, l=7, r=12, tokens=tuple(TARGET1[6:12]))
        segs = SegmentSet(turn_index=2, segments=(seg,))
        disc = net.initial_discourse(params)
        t1 = prepare_turn(params, cfg, in_vocab, ["show", "me"], 1, [], [], disc,
                          out_vocab=out_vocab)
        inputs = prepare_turn(params, cfg, in_vocab, ["on", "from"], 2, [["show", "me"]],
                              [t1.encoded], t1.discourse,
                              segments=segs, source_query=TARGET1, out_vocab=out_vocab)
        # no placeholders in scope and vocabulary suppressed: the segment wins
        params["b_out"].data[:] = -1e9
        out = greedy_decode(inputs, params, cfg, out_vocab, max_tokens=8)
        assert out.segments_used == [0, 0]
        assert out.tokens == list(seg.tokens) + list(seg.tokens)[:2]  # second copy truncated
        assert out.provenance == [(0, 6, 1), (6, 8, 1)]


class TestCheckpoint:
    def test_round_trip(self, tmp_path):
        cfg, params, _, _ = build_model(Variant.FULL)
        path = tmp_path / "model.npz"
        save_checkpoint(path, cfg, params, extra={"note": "x"})
        cfg2, params2, extra = load_checkpoint(path)
        assert cfg2 == cfg and extra == {"note": "x"}
        for name in params.tensors:
            np.testing.assert_array_equal(params[name].data, params2[name].data)

    def test_version_mismatch_fails(self, tmp_path):
        import json

        import numpy as np

        cfg, params, _, _ = build_model(Variant.FULL)
        path = tmp_path / "model.npz"
        save_checkpoint(path, cfg, params)
        data = dict(np.load(path))
        meta = json.loads(bytes(data["meta"].tobytes()).decode())
        meta["version"] = 999
        data["meta"] = np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8)
        np.savez(path, **data)
        with pytest.raises(ConfigError, match="version"):
            load_checkpoint(path)


class TestGradientCheck:
    def test_all_families_match_finite_differences(self):
        cfg, params, in_vocab, out_vocab = build_model(Variant.FULL)
        loss, _ = run_two_turns(cfg, params, in_vocab, out_vocab)
        loss.backward()
        analytic = {n: params[n].grad.copy() for n in params.tensors}
        rng = np.random.default_rng(0)
        eps = 1e-5
        worst = 0.0
        for name in params.names():
            flat = params[name].data.reshape(-1)
            for pos in rng.choice(flat.size, size=min(3, flat.size), replace=False):
                orig = flat[pos]
                flat[pos] = orig + eps
                up, _ = run_two_turns(cfg, params, in_vocab, out_vocab)
                flat[pos] = orig - eps
                down, _ = run_two_turns(cfg, params, in_vocab, out_vocab)
                flat[pos] = orig
                fd = (up.item() - down.item()) / (2 * eps)
                an = analytic[name].reshape(-1)[pos]
                rel = abs(fd - an) / max(abs(fd), abs(an), 1e-6)
                worst = max(worst, rel)
            assert worst < 1e-4, f"family {name} fails the finite-difference check ({worst:.2e})"
