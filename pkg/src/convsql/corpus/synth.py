"""Synthetic multi-turn flight-query corpus and its database.

Interactions open with a flight request and continue with contextual
phenomena: constraint addition, constraint replacement, target-attribute
change, user focus change, and explicit references to previous results. Gold
queries mirror the nested-IN join idiom of the flight domain and always
execute on the generated database.
"""

from __future__ import annotations

import datetime as dt
import random

from ..preprocess.dates import resolve_dates
from .types import CorpusSpec, Database, EntityColumn, Interaction, Query, Utterance

CITIES = [
    "seattle",
    "boston",
    "denver",
    "dallas",
    "atlanta",
    "chicago",
    "pittsburgh",
    "oakland",
    "milwaukee",
    "philadelphia",
    "san francisco",
    "salt lake city",
]

AIRLINES = [
    ("american airlines", "AA"),
    ("delta air lines", "DL"),
    ("united airlines", "UA"),
    ("continental airlines", "CO"),
    ("northwest airlines", "NW"),
    ("lufthansa", "LH"),
]

WEEKDAY_NAMES = ["monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"]

DATE_EXPRESSIONS = ["next %s" % d for d in WEEKDAY_NAMES] + WEEKDAY_NAMES + ["tomorrow"]

MORNING_TIMES = ["6am", "7am", "8am", "9am", "10am"]
EVENING_TIMES = ["5pm", "6pm", "7pm", "8pm", "9pm"]

TARGET_ATTRS = {
    "flights": "flight.flight_id",
    "cost": "flight.cost",
    "departure time": "flight.departure_time",
    "arrival time": "flight.arrival_time",
}

DB_FIRST_DATE = dt.date(1993, 1, 25)
DB_LAST_DATE = dt.date(1993, 4, 30)


def build_flight_database(seed: int = 0, n_flights: int = 3000) -> Database:
    rng = random.Random(seed)
    schema = {
        "flight": [
            ("flight_id", "int"),
            ("from_airport", "text"),
            ("to_airport", "text"),
            ("airline_code", "text"),
            ("flight_days", "text"),
            ("departure_time", "int"),
            ("arrival_time", "int"),
            ("cost", "int"),
        ],
        "airport_service": [("airport_code", "text"), ("city_code", "text")],
        "city": [("city_code", "text"), ("city_name", "text")],
        "days": [("days_code", "text"), ("day_name", "text")],
        "date_day": [
            ("day_name", "text"),
            ("year", "int"),
            ("month_number", "int"),
            ("day_number", "int"),
        ],
        "airline": [("airline_code", "text"), ("airline_name", "text")],
    }
    city_rows = [(f"CC{i:02d}", name.upper()) for i, name in enumerate(CITIES, start=1)]
    airport_codes = {code: f"AP{i:02d}" for i, (code, _) in enumerate(city_rows, start=1)}
    service_rows = [(airport_codes[code], code) for code, _ in city_rows]
    airline_rows = [(code, name.upper()) for name, code in AIRLINES]
    # single-day codes plus a DAILY code matching every weekday
    day_rows = [(d.upper(), d.upper()) for d in WEEKDAY_NAMES]
    day_rows += [("DAILY", d.upper()) for d in WEEKDAY_NAMES]
    date_rows = []
    date = DB_FIRST_DATE
    while date <= DB_LAST_DATE:
        date_rows.append((WEEKDAY_NAMES[date.weekday()].upper(), date.year, date.month, date.day))
        date += dt.timedelta(days=1)
    flight_rows = []
    airports = [a for a, _ in service_rows]
    day_codes = [d.upper() for d in WEEKDAY_NAMES]
    for fid in range(100, 100 + n_flights):
        frm, to = rng.sample(airports, 2)
        dep = rng.choice(range(600, 2200, 100))
        flight_rows.append(
            (
                fid,
                frm,
                to,
                rng.choice(airline_rows)[0],
                "DAILY" if rng.random() < 0.6 else rng.choice(day_codes),
                dep,
                min(dep + rng.choice([100, 200, 300]), 2359),
                rng.randrange(100, 500, 10),
            )
        )
    return Database(
        schema=schema,
        rows={
            "flight": flight_rows,
            "airport_service": service_rows,
            "city": city_rows,
            "days": day_rows,
            "date_day": date_rows,
            "airline": airline_rows,
        },
        entity_columns=[
            EntityColumn("city", "city_name", "CITY"),
            EntityColumn("airline", "airline_name", "AIRLINE"),
        ],
    )


def _city_subquery(column: str, city: str) -> list[str]:
    return (
        ["(", f"flight.{column}", "IN", "(", "SELECT", "airport_service.airport_code",
         "FROM", "airport_service", "WHERE", "airport_service.city_code", "IN",
         "(", "SELECT", "city.city_code", "FROM", "city", "WHERE", "city.city_name",
         "=", f"'{city.upper()}'", ")", ")", ")"]
    )


def _airline_conjunct(airline_name: str) -> list[str]:
    return (
        ["(", "flight.airline_code", "IN", "(", "SELECT", "airline.airline_code",
         "FROM", "airline", "WHERE", "airline.airline_name", "=",
         f"'{airline_name.upper()}'", ")", ")"]
    )


def _date_conjunct(year: int, month: int, day: int) -> list[str]:
    return (
        ["(", "flight.flight_days", "IN", "(", "SELECT", "days.days_code", "FROM",
         "days", "WHERE", "days.day_name", "IN", "(", "SELECT", "date_day.day_name",
         "FROM", "date_day", "WHERE", "date_day.year", "=", str(year), "AND",
         "date_day.month_number", "=", str(month), "AND", "date_day.day_number",
         "=", str(day), ")", ")", ")"]
    )


def _time_conjunct(column: str, op: str, value: int) -> list[str]:
    return ["(", f"flight.{column}", op, str(value), ")"]


def flight_query(select_attr: str, conjuncts: list[list[str]]) -> tuple[str, ...]:
    tokens = ["(", "SELECT", "DISTINCT", select_attr, "FROM", "flight"]
    if conjuncts:
        tokens.append("WHERE")
        for i, conj in enumerate(conjuncts):
            if i:
                tokens.append("AND")
            tokens.extend(conj)
    tokens.extend([")", ";"])
    return tuple(tokens)


def _airports_in_city_query(city: str) -> tuple[str, ...]:
    tokens = ["(", "SELECT", "DISTINCT", "airport_service.airport_code", "FROM",
              "airport_service", "WHERE", "airport_service.city_code", "IN",
              "(", "SELECT", "city.city_code", "FROM", "city", "WHERE",
              "city.city_name", "=", f"'{city.upper()}'", ")", ")", ";"]
    return tuple(tokens)


class _FlightState:
    """Accumulated constraint list; conjunct order is newest-first."""

    def __init__(self) -> None:
        self.select_attr = "flight.flight_id"
        self.constraints: list[tuple[str, object, list[str]]] = []

    def kinds(self) -> list[str]:
        return [k for k, _, _ in self.constraints]

    def add(self, kind: str, payload, conjunct: list[str]) -> None:
        self.constraints.insert(0, (kind, payload, conjunct))

    def replace(self, kind: str, payload, conjunct: list[str]) -> None:
        idx = self.kinds().index(kind)
        self.constraints[idx] = (kind, payload, conjunct)

    def gold(self) -> tuple[str, ...]:
        return flight_query(self.select_attr, [c for _, _, c in self.constraints])


class _Generator:
    def __init__(self, spec: CorpusSpec, database: Database):
        self.rng = random.Random(spec.seed)
        self.spec = spec
        self.db = database

    def _sample_turn_count(self) -> int:
        dist = self.spec.turn_length_distribution
        mean, cap = float(dist.get("mean", 7.0)), int(dist.get("max", 16))
        # Knuth poisson sampler on (mean - 1), plus the mandatory opening turn.
        lam = max(mean - 1.0, 0.0)
        threshold = 2.718281828459045 ** (-lam)
        k, prod = 0, 1.0
        while True:
            prod *= self.rng.random()
            if prod <= threshold:
                break
            k += 1
        return max(1, min(1 + k, cap))

    def _phenomenon(self, state: _FlightState) -> str | None:
        """Sample among phenomena whose preconditions hold; None when exhausted."""
        realizable = {"target-change", "focus-change"}
        if _addable_kinds(state):
            realizable |= {"constraint-add", "explicit-reference"}
        if _replaceable_kinds(state):
            realizable.add("constraint-replace")
        names = [n for n, w in self.spec.phenomenon_weights.items() if w > 0 and n in realizable]
        if not names:
            return None
        weights = [self.spec.phenomenon_weights[n] for n in names]
        return self.rng.choices(names, weights=weights, k=1)[0]

    def _date_values(self, expression: str, document_date: dt.date) -> tuple[int, int, int]:
        resolved = resolve_dates(expression.split(), document_date)
        assert resolved, f"generator produced unresolvable date {expression!r}"
        r = resolved[0]
        return r.year, r.month, r.day

    def _new_time_constraint(self, state: _FlightState, explicit_ref: bool = False):
        options = []
        if "dep_after" not in state.kinds():
            options.append("dep_after")
        if "arr_before" not in state.kinds():
            options.append("arr_before")
        if "arr_at" not in state.kinds():
            options.append("arr_at")
        kind = self.rng.choice(options or ["dep_after"])
        if kind == "dep_after":
            surface = self.rng.choice(MORNING_TIMES)
            value = _time_value(surface)
            text = self.rng.choice(
                ["which ones leave after %s", "leaving after %s"]
                if explicit_ref
                else ["leaving after %s", "departing after %s"]
            ) % surface
            return kind, surface, _time_conjunct("departure_time", ">", value), text
        if kind == "arr_before":
            surface = self.rng.choice(EVENING_TIMES)
            value = _time_value(surface)
            text = self.rng.choice(
                ["which ones arrive before %s", "which of those arrive before %s"]
                if explicit_ref
                else ["arriving before %s", "getting in before %s"]
            ) % surface
            return kind, surface, _time_conjunct("arrival_time", "<", value), text
        surface = self.rng.choice(EVENING_TIMES)
        value = _time_value(surface)
        text = (
            self.rng.choice(["which ones arrive at %s", "which of those arrive at %s"])
            if explicit_ref
            else "arriving at %s"
        ) % surface
        return kind, surface, _time_conjunct("arrival_time", "=", value), text

    def _opening_turn(self, scenario: tuple[str, str], document_date: dt.date, force_extra: bool):
        state = _FlightState()
        from_city, to_city = scenario
        state.add("to", to_city, _city_subquery("to_airport", to_city))
        state.add("from", from_city, _city_subquery("from_airport", from_city))
        base = self.rng.choice(
            [
                "show me flights from %s to %s",
                "i need a flight from %s to %s",
                "list flights from %s to %s",
            ]
        ) % (from_city, to_city)
        n_extra = self.rng.choices([0, 1, 2], weights=[0.35, 0.5, 0.15], k=1)[0]
        if force_extra:
            n_extra = max(1, n_extra)
        for choice in self.rng.sample(["date", "airline", "dep_after"], k=n_extra):
            if choice == "date":
                expression = self.rng.choice(DATE_EXPRESSIONS)
                y, m, d = self._date_values(expression, document_date)
                state.add("date", (expression, y, m, d), _date_conjunct(y, m, d))
                base = f"{base} {expression}"
            elif choice == "airline":
                airline = self.rng.choice(AIRLINES)[0]
                state.add("airline", airline, _airline_conjunct(airline))
                base = f"{base} on {airline}"
            else:
                surface = self.rng.choice(MORNING_TIMES)
                state.add(
                    "dep_after", surface, _time_conjunct("departure_time", ">", _time_value(surface))
                )
                base = f"{base} leaving after {surface}"
        return state, base

    def _interaction(self, index: int, scenario_id: str, scenario: tuple[str, str]) -> Interaction:
        document_date = DB_FIRST_DATE + dt.timedelta(days=self.rng.randrange(7, 45))
        n_turns = self._sample_turn_count()
        turns = []
        state, text = self._opening_turn(scenario, document_date, force_extra=n_turns > 1)
        turns.append((Utterance.from_text(text), Query(tokens=state.gold())))
        focus_pending = False
        for _ in range(n_turns - 1):
            if focus_pending:
                # Return to flight search with a fresh request.
                pair = self._sample_city_pair()
                state, text = self._opening_turn(pair, document_date, force_extra=False)
                turns.append((Utterance.from_text(text), Query(tokens=state.gold())))
                focus_pending = False
                continue
            phenomenon = self._phenomenon(state)
            if phenomenon is None:
                break
            text = self._apply_phenomenon(phenomenon, state, document_date)
            if phenomenon == "focus-change":
                turns.append((Utterance.from_text(text[0]), Query(tokens=text[1])))
                focus_pending = True
            else:
                turns.append((Utterance.from_text(text), Query(tokens=state.gold())))
        return Interaction(
            id=f"int-{index:05d}",
            scenario_id=scenario_id,
            document_date=document_date,
            turns=tuple(turns),
        )

    def _sample_city_pair(self) -> tuple[str, str]:
        return tuple(self.rng.sample(CITIES, 2))

    def _apply_phenomenon(self, phenomenon: str, state: _FlightState, document_date: dt.date):
        if phenomenon == "focus-change":
            city = self.rng.choice(CITIES)
            text = self.rng.choice(
                ["what airports are in %s", "show me the airports in %s"]
            ) % city
            return text, _airports_in_city_query(city)

        if phenomenon == "target-change":
            options = [k for k in TARGET_ATTRS if TARGET_ATTRS[k] != state.select_attr]
            name = self.rng.choice(options)
            state.select_attr = TARGET_ATTRS[name]
            return {
                "flights": "show me those flights",
                "cost": self.rng.choice(["how much do they cost", "what is the cost"]),
                "departure time": "what are the departure times",
                "arrival time": "what are the arrival times",
            }[name]

        if phenomenon == "constraint-replace":
            kind = self.rng.choice(_replaceable_kinds(state))
            if kind == "airline":
                old = next(p for k, p, _ in state.constraints if k == "airline")
                airline = self.rng.choice([a for a, _ in AIRLINES if a != old])
                state.replace("airline", airline, _airline_conjunct(airline))
                return self.rng.choice(["what about %s", "show me %s flights instead"]) % airline
            if kind == "date":
                old = next(p for k, p, _ in state.constraints if k == "date")
                while True:
                    expression = self.rng.choice([e for e in DATE_EXPRESSIONS if e != old[0]])
                    y, m, d = self._date_values(expression, document_date)
                    if (y, m, d) != old[1:]:  # distinct surface can share a resolution
                        break
                state.replace("date", (expression, y, m, d), _date_conjunct(y, m, d))
                return self.rng.choice(["what about %s", "make that %s"]) % expression
            if kind == "dep_after":
                old = next(p for k, p, _ in state.constraints if k == "dep_after")
                surface = self.rng.choice([t for t in MORNING_TIMES if t != old])
                state.replace(
                    "dep_after", surface, _time_conjunct("departure_time", ">", _time_value(surface))
                )
                return "leaving after %s instead" % surface
            old = next(p for k, p, _ in state.constraints if k == kind)
            surface = self.rng.choice([t for t in EVENING_TIMES if t != old])
            op = "<" if kind == "arr_before" else "="
            state.replace(kind, surface, _time_conjunct("arrival_time", op, _time_value(surface)))
            verb = "arriving before %s" if kind == "arr_before" else "arriving at %s"
            return (verb + " instead") % surface

        # constraint-add and explicit-reference both extend the constraint set;
        # explicit references phrase it against the previous result table.
        explicit = phenomenon == "explicit-reference"
        addable = _addable_kinds(state)
        kind = self.rng.choice(addable)
        if kind == "airline":
            airline = self.rng.choice(AIRLINES)[0]
            state.add("airline", airline, _airline_conjunct(airline))
            return (
                self.rng.choice(["which of those are on %s", "which ones are on %s"])
                if explicit
                else self.rng.choice(["on %s", "only on %s"])
            ) % airline
        if kind == "date":
            expression = self.rng.choice(DATE_EXPRESSIONS)
            y, m, d = self._date_values(expression, document_date)
            state.add("date", (expression, y, m, d), _date_conjunct(y, m, d))
            return (
                "which ones fly %s" if explicit else "flying %s"
            ) % expression
        kind, payload, conjunct, text = self._new_time_constraint(state, explicit_ref=explicit)
        state.add(kind, payload, conjunct)
        return text

    def generate(self) -> list[Interaction]:
        n_scenarios = max(3, self.spec.n_interactions // 3)
        pairs = []
        for _ in range(n_scenarios):
            pairs.append(self._sample_city_pair())
        interactions = []
        for i in range(self.spec.n_interactions):
            s_idx = self.rng.randrange(n_scenarios)
            interactions.append(self._interaction(i, f"sc-{s_idx:04d}", pairs[s_idx]))
        return interactions


def _time_value(surface: str) -> int:
    from ..preprocess.dates import parse_time_token

    value = parse_time_token(surface)
    assert value is not None
    return value


def _replaceable_kinds(state: _FlightState) -> list[str]:
    return [k for k in state.kinds() if k in ("airline", "date", "dep_after", "arr_before", "arr_at")]


def _addable_kinds(state: _FlightState) -> list[str]:
    present = set(state.kinds())
    return [k for k in ("airline", "date", "dep_after", "arr_before", "arr_at") if k not in present]


def generate_synthetic_corpus(spec: CorpusSpec) -> tuple[list[Interaction], Database]:
    """Generate interactions plus the database their gold queries run against."""
    database = build_flight_database(seed=spec.seed)
    interactions = _Generator(spec, database).generate()
    return interactions, database
