"""Input and output vocabularies with typed-placeholder collapsing."""

from __future__ import annotations

from dataclasses import dataclass

from ..placeholders import split_placeholder, split_segment_ref

UNK = "<unk>"
START = "<start>"
END = "<end>"
DELIM = "<delim>"


@dataclass(frozen=True)
class InputVocabulary:
    """Embedding rows for encoder inputs.

    With anonymized-token scoring, an indexed placeholder (CITY#2) embeds as
    its bare type row (CITY); otherwise it is an ordinary token.
    """

    tokens: tuple[str, ...]
    anon_scoring: bool

    def __post_init__(self):
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.tokens)})

    def __len__(self) -> int:
        return len(self.tokens)

    def embed_id(self, token: str) -> int:
        if self.anon_scoring:
            parts = split_placeholder(token)
            if parts is not None:
                token = parts[0]
        idx = self._index.get(token)
        return idx if idx is not None else self._index[UNK]


@dataclass(frozen=True)
class OutputVocabulary:
    """Embedding rows and generable outputs for the decoder.

    ``embed_tokens`` are the rows of the output embedding table (includes
    <start> and, with scoring, the placeholder type rows, neither of which can
    be generated). ``gen_tokens`` are the columns of the output projection:
    the ordinary query tokens plus <end>, and the indexed placeholders when
    scoring is off.
    """

    embed_tokens: tuple[str, ...]
    gen_tokens: tuple[str, ...]
    anon_scoring: bool

    def __post_init__(self):
        object.__setattr__(self, "_embed_index", {t: i for i, t in enumerate(self.embed_tokens)})
        object.__setattr__(self, "_gen_index", {t: i for i, t in enumerate(self.gen_tokens)})

    def embed_id(self, token: str) -> int:
        if self.anon_scoring:
            parts = split_placeholder(token)
            if parts is not None:
                token = parts[0]
        idx = self._embed_index.get(token)
        return idx if idx is not None else self._embed_index[UNK]

    def gen_id(self, token: str) -> int | None:
        return self._gen_index.get(token)

    @property
    def end_id(self) -> int:
        return self._gen_index[END]


def build_vocabularies(
    utterance_token_counts: dict[str, int],
    target_tokens: set[str],
    anon_types: tuple[str, ...],
    anon_scoring: bool,
    min_count: int = 2,
) -> tuple[InputVocabulary, OutputVocabulary]:
    """Assemble vocabularies from training-side token statistics.

    Input tokens seen fewer than ``min_count`` times map to the unknown
    embedding; placeholders and type symbols are always present.
    """
    input_tokens = [UNK, DELIM]
    if anon_scoring:
        input_tokens.extend(anon_types)
    seen_placeholders = sorted(
        t for t in set(utterance_token_counts) | target_tokens if split_placeholder(t)
    )
    if not anon_scoring:
        input_tokens.extend(seen_placeholders)
    input_tokens.extend(
        sorted(
            t
            for t, n in utterance_token_counts.items()
            if n >= min_count and t not in input_tokens and not split_placeholder(t)
        )
    )

    plain_targets = sorted(
        t
        for t in target_tokens
        if not split_placeholder(t) and split_segment_ref(t) is None
    )
    gen_tokens = [END] + plain_targets
    embed_tokens = [UNK, START, END]
    if anon_scoring:
        embed_tokens.extend(anon_types)
    else:
        gen_tokens.extend(seen_placeholders)
        embed_tokens.extend(seen_placeholders)
    embed_tokens.extend(plain_targets)

    return (
        InputVocabulary(tokens=tuple(input_tokens), anon_scoring=anon_scoring),
        OutputVocabulary(
            embed_tokens=tuple(embed_tokens),
            gen_tokens=tuple(gen_tokens),
            anon_scoring=anon_scoring,
        ),
    )
