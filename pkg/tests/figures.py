"""Shared hand-built fixtures: the canonical 4-turn seattle-to-boston interaction."""

from __future__ import annotations

FROM_CONJ = (
    "( flight.from_airport IN ( SELECT airport_service.airport_code FROM airport_service "
    "WHERE airport_service.city_code IN ( SELECT city.city_code FROM city "
    "WHERE city.city_name = 'SEATTLE' ) ) )"
).split()

TO_CONJ = [t if t != "'SEATTLE'" else "'BOSTON'" for t in FROM_CONJ]
TO_CONJ[1] = "flight.to_airport"

DATE_CONJ = (
    "( flight.flight_days IN ( SELECT days.days_code FROM days WHERE days.day_name IN "
    "( SELECT date_day.day_name FROM date_day WHERE date_day.year = 1993 AND "
    "date_day.month_number = 2 AND date_day.day_number = 8 ) ) )"
).split()

AIRLINE_AA_CONJ = "( flight.airline_code = 'AA' )".split()
AIRLINE_DL_CONJ = "( flight.airline_code = 'DL' )".split()
ARRIVAL_CONJ = "( flight.arrival_time = 1900 )".split()

PREFIX = "( SELECT DISTINCT flight.flight_id FROM flight WHERE".split()
SUFFIX = [")", ";"]


def query_with_conjuncts(conjuncts) -> list[str]:
    tokens = list(PREFIX)
    for i, conj in enumerate(conjuncts):
        if i:
            tokens.append("AND")
        tokens.extend(conj)
    tokens.extend(SUFFIX)
    return tokens


QUERY_1 = query_with_conjuncts([FROM_CONJ, TO_CONJ, DATE_CONJ])
QUERY_2 = query_with_conjuncts([AIRLINE_AA_CONJ, FROM_CONJ, TO_CONJ, DATE_CONJ])
QUERY_3 = query_with_conjuncts([AIRLINE_AA_CONJ, FROM_CONJ, TO_CONJ, DATE_CONJ, ARRIVAL_CONJ])
QUERY_4 = query_with_conjuncts([AIRLINE_DL_CONJ, FROM_CONJ, TO_CONJ, DATE_CONJ])

UTTERANCES = [
    "show me flights from seattle to boston next monday",
    "on american airlines",
    "which ones arrive at 7pm",
    "show me delta flights",
]

assert len(QUERY_1) == 88
assert len(QUERY_2) == 94
