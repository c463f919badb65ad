"""Tokenizer for the SQL subset."""

from __future__ import annotations

KEYWORDS = {
    "SELECT",
    "DISTINCT",
    "FROM",
    "WHERE",
    "AND",
    "OR",
    "IN",
    "MIN",
    "MAX",
    "COUNT",
}

_PUNCT = {"(", ")", ",", ";"}
_OP_CHARS = {"=", "<", ">"}


class SqlTokenizeError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


def tokenize_sql(text: str) -> list[str]:
    """Split SQL text into tokens.

    Parentheses, commas, semicolons, and comparison operators stand alone;
    quoted literals are single tokens including their quotes; keywords are
    upper-cased; identifiers and numbers pass through unchanged.
    """
    tokens: list[str] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in _PUNCT:
            tokens.append(ch)
            i += 1
        elif ch in _OP_CHARS:
            if text[i : i + 2] in ("<=", ">=", "<>"):
                tokens.append(text[i : i + 2])
                i += 2
            else:
                tokens.append(ch)
                i += 1
        elif ch == "'":
            end = text.find("'", i + 1)
            if end < 0:
                raise SqlTokenizeError("unterminated quoted literal", i)
            tokens.append(text[i : end + 1])
            i = end + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in _PUNCT and text[j] not in _OP_CHARS and text[j] != "'":
                j += 1
            word = text[i:j]
            tokens.append(word.upper() if word.upper() in KEYWORDS else word)
            i = j
    return tokens


def detokenize_sql(tokens) -> str:
    """Canonical serialization: single space between tokens."""
    return " ".join(tokens)
