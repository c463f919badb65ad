"""Anonymization, date resolution, and post-processing tests."""

import datetime as dt

import pytest
from figures import QUERY_1, UTTERANCES
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import count_parens_balance

from convsql.corpus import CorpusSpec, Database, Utterance, generate_synthetic_corpus
from convsql.corpus.types import EntityColumn
from convsql.preprocess import (
    DEFAULT_TYPE_PRIORITY,
    AnonymizationMapping,
    EntityCollisionError,
    EntityDictionary,
    anonymize_query,
    anonymize_utterance,
    build_entity_dictionary,
    collapse_spelled_numbers,
    deanonymize,
    fix_parentheses,
    resolve_dates,
)

DOC_DATE = dt.date(1993, 2, 3)  # a Wednesday


@pytest.fixture(scope="module")
def flight_dictionary() -> EntityDictionary:
    _, db = generate_synthetic_corpus(CorpusSpec(n_interactions=0, seed=0))
    return build_entity_dictionary(db, DEFAULT_TYPE_PRIORITY)


class TestDictionary:
    def test_city_entry(self, flight_dictionary):
        assert flight_dictionary.lookup(("seattle",)) == ("'SEATTLE'", "CITY")

    def test_multi_token_surface(self, flight_dictionary):
        assert flight_dictionary.lookup(("san", "francisco")) == ("'SAN FRANCISCO'", "CITY")

    def test_no_entity_columns_gives_empty_dictionary(self):
        db = Database(schema={"t": [("a", "text")]}, rows={"t": [("x",)]})
        assert len(build_entity_dictionary(db)) == 0

    def test_collision_raises_without_priority(self):
        db = Database(
            schema={"a": [("name", "text")], "b": [("name", "text")]},
            rows={"a": [("DELTA",)], "b": [("DELTA",)]},
            entity_columns=[EntityColumn("a", "name", "AIRLINE"), EntityColumn("b", "name", "CITY")],
        )
        with pytest.raises(EntityCollisionError, match="delta"):
            build_entity_dictionary(db)
        resolved = build_entity_dictionary(db, type_priority=("CITY", "AIRLINE"))
        assert resolved.lookup(("delta",))[1] == "CITY"

    def test_file_round_trip(self, flight_dictionary, tmp_path):
        path = tmp_path / "dict.json"
        flight_dictionary.save(path)
        assert EntityDictionary.load(path).entries == flight_dictionary.entries


class TestDates:
    def test_next_monday_from_wednesday(self):
        [r] = resolve_dates(["next", "monday"], DOC_DATE)
        assert (r.day, r.month, r.year) == (8, 2, 1993)

    def test_tomorrow(self):
        [r] = resolve_dates(["tomorrow"], DOC_DATE)
        assert r.as_date() == DOC_DATE + dt.timedelta(days=1)

    def test_bare_weekday_from_tuesday(self):
        doc = dt.date(1993, 2, 2)  # a Tuesday
        [r] = resolve_dates(["monday"], doc)
        assert r.as_date() == doc + dt.timedelta(days=6)

    def test_bare_weekday_today_stays(self):
        doc = dt.date(1993, 2, 1)  # a Monday
        [r] = resolve_dates(["monday"], doc)
        assert r.as_date() == doc

    def test_next_weekday_on_same_weekday_moves_a_week(self):
        doc = dt.date(1993, 2, 1)
        [r] = resolve_dates(["next", "monday"], doc)
        assert r.as_date() == doc + dt.timedelta(days=7)

    def test_month_name_day(self):
        [r] = resolve_dates(["february", "20"], DOC_DATE)
        assert (r.day, r.month, r.year) == (20, 2, 1993)

    def test_month_day_in_past_rolls_forward(self):
        [r] = resolve_dates(["january", "1"], DOC_DATE)
        assert r.as_date() >= DOC_DATE

    def test_day_joined_by_or_uses_month_context(self):
        rs = resolve_dates(["february", "20", "or", "21"], DOC_DATE)
        assert [(r.day, r.month) for r in rs] == [(20, 2), (21, 2)]

    def test_unresolvable_left_untouched(self):
        assert resolve_dates(["the", "following", "week"], DOC_DATE) == []

    @settings(max_examples=80, deadline=None)
    @given(
        st.sampled_from(
            ["monday", "tuesday", "friday", "sunday", "tomorrow", "today"]
        ),
        st.dates(min_value=dt.date(1993, 1, 1), max_value=dt.date(1994, 1, 1)),
    )
    def test_resolved_dates_never_precede_document_date(self, word, doc):
        for r in resolve_dates(["next", word] if word not in ("today", "tomorrow") else [word], doc):
            assert r.as_date() >= doc


class TestAnonymize:
    def test_figure_fixture_exact(self, flight_dictionary):
        mapping = AnonymizationMapping()
        anon, mapping = anonymize_utterance(
            Utterance.from_text(UTTERANCES[0]), flight_dictionary, DOC_DATE, mapping
        )
        assert anon == "show me flights from CITY#1 to CITY#2 DAY#1 MONTH#1 YEAR#1".split()
        assert mapping.entries == {
            "CITY#1": "'SEATTLE'",
            "CITY#2": "'BOSTON'",
            "DAY#1": "8",
            "MONTH#1": "2",
            "YEAR#1": "1993",
        }

    def test_figure_query_anonymization(self, flight_dictionary):
        mapping = AnonymizationMapping()
        _, mapping = anonymize_utterance(
            Utterance.from_text(UTTERANCES[0]), flight_dictionary, DOC_DATE, mapping
        )
        anon_q = anonymize_query(QUERY_1, mapping)
        assert "CITY#1" in anon_q and "'SEATTLE'" not in anon_q
        assert anon_q[QUERY_1.index("1993")] == "YEAR#1"
        assert deanonymize(anon_q, mapping) == QUERY_1

    def test_no_hits_is_identity(self, flight_dictionary):
        mapping = AnonymizationMapping()
        utt = Utterance.from_text("show me the list")
        anon, mapping = anonymize_utterance(utt, flight_dictionary, DOC_DATE, mapping)
        assert anon == list(utt.tokens)
        assert len(mapping) == 0

    def test_repeated_entity_reuses_placeholder(self, flight_dictionary):
        mapping = AnonymizationMapping()
        anon, _ = anonymize_utterance(
            Utterance.from_text("seattle to seattle"), flight_dictionary, DOC_DATE, mapping
        )
        assert anon == ["CITY#1", "to", "CITY#1"]

    def test_entities_keep_placeholders_across_turns(self, flight_dictionary):
        mapping = AnonymizationMapping()
        anonymize_utterance(
            Utterance.from_text("from seattle to boston"), flight_dictionary, DOC_DATE, mapping
        )
        anon, _ = anonymize_utterance(
            Utterance.from_text("flights to seattle"), flight_dictionary, DOC_DATE, mapping
        )
        assert anon == ["flights", "to", "CITY#1"]

    def test_time_and_number(self, flight_dictionary):
        mapping = AnonymizationMapping()
        anon, mapping = anonymize_utterance(
            Utterance.from_text("which ones arrive at 7pm on flight 235"),
            flight_dictionary,
            DOC_DATE,
            mapping,
        )
        assert "TIME#1" in anon and "NUM#1" in anon
        assert mapping.entries["TIME#1"] == "1900"
        assert mapping.entries["NUM#1"] == "235"

    def test_spelled_numbers_collapse(self):
        assert collapse_spelled_numbers("flight two three five".split()) == ["flight", "235"]
        assert collapse_spelled_numbers(["one"]) == ["one"]

    def test_empty_mapping_query_identity(self):
        assert anonymize_query(QUERY_1, AnonymizationMapping()) == QUERY_1

    def test_literal_replaced_at_every_occurrence(self):
        mapping = AnonymizationMapping()
        mapping.placeholder_for("'X'", "CITY")
        tokens = ["a", "=", "'X'", "OR", "b", "=", "'X'"]
        anon = anonymize_query(tokens, mapping)
        oracle = [mapping.placeholder_of_literal(t) or t for t in tokens]
        assert anon == oracle == ["a", "=", "CITY#1", "OR", "b", "=", "CITY#1"]

    def test_unknown_placeholder_survives_deanonymization(self):
        mapping = AnonymizationMapping()
        mapping.placeholder_for("'X'", "CITY")
        assert deanonymize(["CITY#3"], mapping) == ["CITY#3"]

    def test_mapping_injectivity_rejected_on_construction(self):
        with pytest.raises(ValueError):
            AnonymizationMapping(entries={"CITY#1": "'X'", "CITY#2": "'X'"})

    def test_interaction_round_trip_property(self, flight_dictionary):
        interactions, _ = generate_synthetic_corpus(CorpusSpec(n_interactions=15, seed=41))
        for interaction in interactions:
            mapping = AnonymizationMapping()
            for utt, query in interaction.turns:
                _, mapping = anonymize_utterance(
                    utt, flight_dictionary, interaction.document_date, mapping
                )
                anon_q = anonymize_query(query.tokens, mapping)
                assert deanonymize(anon_q, mapping) == list(query.tokens)


class TestFixParentheses:
    def test_one_unmatched_open(self):
        assert fix_parentheses("( SELECT x FROM t".split()) == "( SELECT x FROM t )".split()

    def test_balanced_unchanged(self):
        assert fix_parentheses(QUERY_1) == QUERY_1

    def test_two_unmatched(self):
        assert fix_parentheses(["(", "(", "a", ")"]) == ["(", "(", "a", ")", ")"]

    @given(st.lists(st.sampled_from(["(", ")", "a", "AND"]), max_size=30))
    def test_counter_oracle(self, tokens):
        fixed = fix_parentheses(tokens)
        assert fixed[: len(tokens)] == tokens
        assert len(fixed) == len(tokens) + max(0, count_parens_balance(tokens))
        if count_parens_balance(tokens) > 0:
            assert count_parens_balance(fixed) == 0
