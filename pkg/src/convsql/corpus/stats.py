"""Corpus summary statistics."""

from __future__ import annotations

from .types import CorpusError, Interaction


def corpus_statistics(interactions: list[Interaction]) -> dict:
    if not interactions:
        raise CorpusError("cannot compute statistics of an empty corpus")
    turns_per = [len(i) for i in interactions]
    utt_lens = [len(u.tokens) for i in interactions for u, _ in i.turns]
    query_lens = [len(q.tokens) for i in interactions for _, q in i.turns]
    utt_vocab = {t for i in interactions for u, _ in i.turns for t in u.tokens}
    query_vocab = {t for i in interactions for _, q in i.turns for t in q.tokens}
    return {
        "n_interactions": len(interactions),
        "n_utterances": sum(turns_per),
        "mean_turns": sum(turns_per) / len(turns_per),
        "max_turns": max(turns_per),
        "mean_utterance_tokens": sum(utt_lens) / len(utt_lens),
        "max_utterance_tokens": max(utt_lens),
        "mean_query_tokens": sum(query_lens) / len(query_lens),
        "max_query_tokens": max(query_lens),
        "utterance_vocab_size": len(utt_vocab),
        "query_vocab_size": len(query_vocab),
    }
