"""Rule-based resolution of date and clock-time expressions.

Covers weekday names, "next <weekday>", "today", "tomorrow",
"<month-name> <day>", and bare day numbers joined to an earlier date by
"or"/"and". Resolution is anchored to the interaction's document date, and
every resolved date is pushed to or past it: users ask about future travel,
so a naive resolution landing before the document date gains a week (weekday
forms) or rolls to the next year (calendar forms).
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

WEEKDAYS = {
    "monday": 0,
    "tuesday": 1,
    "wednesday": 2,
    "thursday": 3,
    "friday": 4,
    "saturday": 5,
    "sunday": 6,
}

MONTHS = {
    "january": 1,
    "february": 2,
    "march": 3,
    "april": 4,
    "may": 5,
    "june": 6,
    "july": 7,
    "august": 8,
    "september": 9,
    "october": 10,
    "november": 11,
    "december": 12,
}


@dataclass(frozen=True)
class ResolvedDate:
    day: int
    month: int
    year: int
    source_span: tuple[int, int]  # half-open token range

    def __post_init__(self) -> None:
        dt.date(self.year, self.month, self.day)  # raises on invalid dates

    def as_date(self) -> dt.date:
        return dt.date(self.year, self.month, self.day)


def _from_date(date: dt.date, span: tuple[int, int]) -> ResolvedDate:
    return ResolvedDate(day=date.day, month=date.month, year=date.year, source_span=span)


def _weekday_on_or_after(doc: dt.date, weekday: int) -> dt.date:
    naive = doc + dt.timedelta(days=weekday - doc.weekday())
    if naive < doc:
        naive += dt.timedelta(days=7)
    return naive


def _calendar_on_or_after(doc: dt.date, month: int, day: int) -> dt.date | None:
    try:
        naive = dt.date(doc.year, month, day)
    except ValueError:
        return None
    if naive < doc:
        bumped = naive + dt.timedelta(days=7)
        if bumped >= doc:
            return bumped
        try:
            return dt.date(doc.year + 1, month, day)
        except ValueError:
            return None
    return naive


def _small_int(token: str) -> int | None:
    if token.isdigit() and 1 <= int(token) <= 31:
        return int(token)
    return None


def resolve_dates(tokens, document_date: dt.date) -> list[ResolvedDate]:
    """Find date expressions in an utterance token sequence.

    Unresolvable expressions are simply not reported; spans never overlap.
    """
    tokens = list(tokens)
    out: list[ResolvedDate] = []
    month_context: int | None = None
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok == "next" and i + 1 < len(tokens) and tokens[i + 1] in WEEKDAYS:
            offset = (WEEKDAYS[tokens[i + 1]] - document_date.weekday()) % 7 or 7
            out.append(_from_date(document_date + dt.timedelta(days=offset), (i, i + 2)))
            i += 2
        elif tok in WEEKDAYS:
            out.append(_from_date(_weekday_on_or_after(document_date, WEEKDAYS[tok]), (i, i + 1)))
            i += 1
        elif tok == "tomorrow":
            out.append(_from_date(document_date + dt.timedelta(days=1), (i, i + 1)))
            i += 1
        elif tok == "today":
            out.append(_from_date(document_date, (i, i + 1)))
            i += 1
        elif tok in MONTHS and i + 1 < len(tokens) and _small_int(tokens[i + 1]) is not None:
            resolved = _calendar_on_or_after(document_date, MONTHS[tok], _small_int(tokens[i + 1]))
            if resolved is not None:
                out.append(_from_date(resolved, (i, i + 2)))
                month_context = MONTHS[tok]
                i += 2
            else:
                i += 1
        elif (
            month_context is not None
            and tok in ("or", "and")
            and i + 1 < len(tokens)
            and _small_int(tokens[i + 1]) is not None
        ):
            resolved = _calendar_on_or_after(document_date, month_context, _small_int(tokens[i + 1]))
            if resolved is not None:
                out.append(_from_date(resolved, (i + 1, i + 2)))
                i += 2
            else:
                i += 1
        else:
            i += 1
    return out


def parse_time_token(token: str) -> int | None:
    """Clock times like "7pm" or "630am" as 24-hour integers (1900, 630)."""
    suffix = token[-2:]
    if suffix not in ("am", "pm"):
        return None
    digits = token[:-2]
    if not digits.isdigit():
        return None
    value = int(digits)
    hours, minutes = (value, 0) if value <= 12 else divmod(value, 100)
    if not (1 <= hours <= 12) or minutes >= 60:
        return None
    hours = hours % 12
    if suffix == "pm":
        hours += 12
    return hours * 100 + minutes
