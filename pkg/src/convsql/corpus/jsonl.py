"""Interaction JSONL reading and canonical writing.

One JSON object per line:
{"id": str, "scenario": str, "date": "YYYY-MM-DD",
 "turns": [{"utterance": str, "sql": [str, ...]}]}
"""

from __future__ import annotations

import datetime as dt
import json

from ..sqlkit.tokenizer import detokenize_sql, tokenize_sql
from .types import CorpusError, Interaction, Query, Utterance


def _interaction_from_record(record: dict, lineno: int) -> Interaction:
    def need(key: str):
        if key not in record:
            raise CorpusError(f"line {lineno}: missing field {key!r}")
        return record[key]

    raw_turns = need("turns")
    if not isinstance(raw_turns, list) or not raw_turns:
        raise CorpusError(f"line {lineno}: field 'turns' must be a non-empty list")
    turns = []
    for t, raw in enumerate(raw_turns, start=1):
        if not isinstance(raw, dict) or "utterance" not in raw or "sql" not in raw:
            raise CorpusError(f"line {lineno}: turn {t} needs 'utterance' and 'sql'")
        golds = raw["sql"]
        if not isinstance(golds, list) or not golds:
            raise CorpusError(f"line {lineno}: turn {t} field 'sql' must be a non-empty list")
        token_seqs = [tuple(tokenize_sql(s)) for s in golds]
        turns.append(
            (
                Utterance.from_text(raw["utterance"]),
                Query(tokens=token_seqs[0], alternatives=tuple(token_seqs[1:])),
            )
        )
    try:
        date = dt.date.fromisoformat(need("date"))
    except ValueError as exc:
        raise CorpusError(f"line {lineno}: bad field 'date': {exc}") from exc
    return Interaction(
        id=str(need("id")),
        scenario_id=str(need("scenario")),
        document_date=date,
        turns=tuple(turns),
    )


def load_interactions(path, format: str = "jsonl") -> list[Interaction]:
    if format != "jsonl":
        raise CorpusError(f"unknown format {format!r}")
    interactions = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"line {lineno}: invalid JSON: {exc}") from exc
            interactions.append(_interaction_from_record(record, lineno))
    return interactions


def interaction_to_record(interaction: Interaction) -> dict:
    return {
        "id": interaction.id,
        "scenario": interaction.scenario_id,
        "date": interaction.document_date.isoformat(),
        "turns": [
            {
                "utterance": utt.raw_text,
                "sql": [detokenize_sql(g) for g in query.all_golds()],
            }
            for utt, query in interaction.turns
        ],
    }


def save_interactions(interactions, path) -> None:
    with open(path, "w") as fh:
        for interaction in interactions:
            fh.write(json.dumps(interaction_to_record(interaction)) + "\n")
