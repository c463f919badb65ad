"""Corpus data model, JSONL IO, splitting, generation, statistics."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convsql.corpus import (
    CorpusError,
    CorpusSpec,
    Database,
    Interaction,
    Query,
    Utterance,
    corpus_statistics,
    generate_synthetic_corpus,
    load_interactions,
    save_interactions,
    split_by_scenario,
    tokenize_utterance,
)
from convsql.sqlkit import execute, parse_sql
from convsql.sqlkit.parser import NodeKind


class TestTypes:
    def test_tokenize_lowercases_and_splits_punctuation(self):
        assert tokenize_utterance("Show me flights to Boston.") == (
            "show",
            "me",
            "flights",
            "to",
            "boston",
            ".",
        )

    def test_empty_utterance_rejected(self):
        with pytest.raises(CorpusError):
            Utterance(tokens=(), raw_text="")

    def test_interaction_turns_are_one_based(self):
        utt = Utterance.from_text("hi there")
        q = Query(tokens=("SELECT", "a", "FROM", "t"))
        interaction = Interaction("i1", "s1", __import__("datetime").date(1993, 2, 3), ((utt, q),))
        assert interaction.turn(1) == (utt, q)
        with pytest.raises(IndexError):
            interaction.turn(0)

    def test_query_shortest_gold(self):
        q = Query(tokens=("a", "b", "c"), alternatives=(("a", "b"),))
        assert q.shortest_gold() == ("a", "b")

    def test_phenomenon_weights_must_sum_to_one(self):
        with pytest.raises(CorpusError):
            CorpusSpec(n_interactions=1, phenomenon_weights={"constraint-add": 0.5})

    def test_entity_column_values_must_be_unique(self):
        with pytest.raises(CorpusError):
            Database(
                schema={"t": [("a", "text")]},
                rows={"t": [("x",), ("x",)]},
                entity_columns=[__import__("convsql.corpus.types", fromlist=["EntityColumn"]).EntityColumn("t", "a", "CITY")],
            )


class TestJsonl:
    def test_round_trip_is_byte_identical(self, tmp_path):
        interactions, _ = generate_synthetic_corpus(CorpusSpec(n_interactions=8, seed=3))
        p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        save_interactions(interactions, p1)
        save_interactions(load_interactions(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_empty_file_gives_empty_sequence(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        assert load_interactions(path) == []

    def test_missing_turns_field_names_line(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text(json.dumps({"id": "x", "scenario": "s", "date": "1993-02-03"}) + "\n")
        with pytest.raises(CorpusError, match="line 1.*turns"):
            load_interactions(path)

    def test_bad_date_reported(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        record = {
            "id": "x",
            "scenario": "s",
            "date": "93/02/03",
            "turns": [{"utterance": "hi", "sql": ["SELECT a FROM t"]}],
        }
        path.write_text(json.dumps(record) + "\n")
        with pytest.raises(CorpusError, match="line 1.*date"):
            load_interactions(path)

    def test_unknown_format_rejected(self, tmp_path):
        with pytest.raises(CorpusError, match="format"):
            load_interactions(tmp_path / "x.csv", format="csv")

    def test_gold_alternatives_preserved(self, tmp_path):
        record = {
            "id": "x",
            "scenario": "s",
            "date": "1993-02-03",
            "turns": [{"utterance": "hi", "sql": ["SELECT a FROM t", "SELECT DISTINCT a FROM t"]}],
        }
        path = tmp_path / "alt.jsonl"
        path.write_text(json.dumps(record) + "\n")
        [interaction] = load_interactions(path)
        assert len(interaction.turns[0][1].all_golds()) == 2


class TestSplit:
    def test_scenarios_are_disjoint(self):
        interactions, _ = generate_synthetic_corpus(CorpusSpec(n_interactions=60, seed=1))
        train, dev, test = split_by_scenario(interactions, (0.7, 0.2, 0.1), seed=4)
        sets = [
            {i.scenario_id for i in split} for split in (train, dev, test)
        ]
        assert not (sets[0] & sets[1]) and not (sets[0] & sets[2]) and not (sets[1] & sets[2])
        assert len(train) + len(dev) + len(test) == 60

    def test_exact_fit_with_three_scenarios(self):
        interactions, _ = generate_synthetic_corpus(CorpusSpec(n_interactions=9, seed=2))
        by_scenario = {}
        for i in interactions:
            by_scenario.setdefault(i.scenario_id, []).append(i)
        splits = split_by_scenario(interactions, (1 / 3, 1 / 3, 1 / 3), seed=0)
        assert all(len({i.scenario_id for i in s}) >= 1 for s in splits)

    def test_deterministic(self):
        interactions, _ = generate_synthetic_corpus(CorpusSpec(n_interactions=40, seed=9))
        a = split_by_scenario(interactions, (0.6, 0.2, 0.2), seed=11)
        b = split_by_scenario(interactions, (0.6, 0.2, 0.2), seed=11)
        assert [[i.id for i in s] for s in a] == [[i.id for i in s] for s in b]

    def test_ratio_approximation(self):
        interactions, _ = generate_synthetic_corpus(CorpusSpec(n_interactions=200, seed=13))
        train, dev, test = split_by_scenario(interactions, (0.69, 0.23, 0.08), seed=0)
        assert abs(len(train) - 138) < 25 and abs(len(dev) - 46) < 15 and abs(len(test) - 16) < 10

    def test_published_split_sizes_approximated(self):
        # 1148/380/130 out of 1658, up to scenario granularity
        interactions, _ = generate_synthetic_corpus(CorpusSpec(n_interactions=1658, seed=19))
        ratios = (1148 / 1658, 380 / 1658, 130 / 1658)
        train, dev, test = split_by_scenario(interactions, ratios, seed=2)
        by_scenario = {}
        for i in interactions:
            by_scenario.setdefault(i.scenario_id, []).append(i)
        slack = max(len(v) for v in by_scenario.values())
        assert abs(len(train) - 1148) <= slack
        assert abs(len(dev) - 380) <= slack
        assert abs(len(test) - 130) <= slack

    def test_too_few_scenarios_error(self):
        interactions, _ = generate_synthetic_corpus(CorpusSpec(n_interactions=2, seed=0))
        only = [i for i in interactions if i.scenario_id == interactions[0].scenario_id]
        with pytest.raises(CorpusError):
            split_by_scenario(only, (0.5, 0.25, 0.25), seed=0)


class TestGenerator:
    def test_empty_spec_gives_empty_corpus_with_database(self):
        interactions, db = generate_synthetic_corpus(CorpusSpec(n_interactions=0, seed=0))
        assert interactions == []
        assert db.has_table("flight")

    def test_deterministic(self):
        a, _ = generate_synthetic_corpus(CorpusSpec(n_interactions=12, seed=21))
        b, _ = generate_synthetic_corpus(CorpusSpec(n_interactions=12, seed=21))
        assert [i.id for i in a] == [i.id for i in b]
        assert all(x.turns == y.turns for x, y in zip(a, b))

    def test_every_gold_query_executes(self):
        interactions, db = generate_synthetic_corpus(CorpusSpec(n_interactions=30, seed=17))
        for interaction in interactions:
            for _, query in interaction.turns:
                assert not execute(query.tokens, db).execution_failed

    def test_mean_turns_near_seven(self):
        interactions, _ = generate_synthetic_corpus(CorpusSpec(n_interactions=200, seed=23))
        mean = sum(len(i) for i in interactions) / len(interactions)
        assert abs(mean - 7.0) <= 2.0

    def test_pure_constraint_add_gives_strict_supersets(self):
        spec = CorpusSpec(
            n_interactions=6,
            phenomenon_weights={"constraint-add": 1.0},
            seed=31,
        )
        interactions, _ = generate_synthetic_corpus(spec)

        def conjunct_set(tokens):
            tree = parse_sql(list(tokens))
            where = [n for n in tree.walk() if n.kind is NodeKind.WHERE]
            if not where:
                return frozenset()
            cond = where[0].children[0]
            children = cond.children if cond.kind is NodeKind.AND_LIST else (cond,)
            return frozenset(tuple(tokens[c.span[0] : c.span[1]]) for c in children)

        for interaction in interactions:
            for (_, prev), (_, cur) in zip(interaction.turns, interaction.turns[1:]):
                assert conjunct_set(prev.tokens) < conjunct_set(cur.tokens)

    def test_pure_replace_changes_one_conjunct(self):
        spec = CorpusSpec(
            n_interactions=6,
            phenomenon_weights={"constraint-replace": 1.0},
            seed=37,
        )
        interactions, _ = generate_synthetic_corpus(spec)

        def conjunct_set(tokens):
            tree = parse_sql(list(tokens))
            where = [n for n in tree.walk() if n.kind is NodeKind.WHERE][0]
            cond = where.children[0]
            children = cond.children if cond.kind is NodeKind.AND_LIST else (cond,)
            return frozenset(tuple(tokens[c.span[0] : c.span[1]]) for c in children)

        for interaction in interactions:
            for (_, prev), (_, cur) in zip(interaction.turns, interaction.turns[1:]):
                before, after = conjunct_set(prev.tokens), conjunct_set(cur.tokens)
                assert len(before - after) == 1 and len(after - before) == 1


class TestStatistics:
    def test_empty_corpus_rejected(self):
        with pytest.raises(CorpusError):
            corpus_statistics([])

    def test_single_turn_arithmetic(self):
        utt = Utterance.from_text("one two three")
        q = Query(tokens=("SELECT", "a", "FROM", "t"))
        date = __import__("datetime").date(1993, 2, 3)
        stats = corpus_statistics([Interaction("i", "s", date, ((utt, q),))])
        assert stats["mean_turns"] == 1
        assert stats["mean_utterance_tokens"] == 3

    def test_mean_and_max(self):
        date = __import__("datetime").date(1993, 2, 3)
        q = Query(tokens=("SELECT", "a", "FROM", "t"))
        i1 = Interaction("a", "s", date, ((Utterance.from_text("x y"), q),))
        i2 = Interaction("b", "s", date, ((Utterance.from_text("x y z w"), q),))
        stats = corpus_statistics([i1, i2])
        assert stats["mean_utterance_tokens"] == 3
        assert stats["max_utterance_tokens"] == 4

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_generator_determinism_property(self, seed):
        a, _ = generate_synthetic_corpus(CorpusSpec(n_interactions=2, seed=seed))
        b, _ = generate_synthetic_corpus(CorpusSpec(n_interactions=2, seed=seed))
        assert all(x.turns == y.turns for x, y in zip(a, b))
