"""Scenario-disjoint corpus splitting."""

from __future__ import annotations

import random

from .types import CorpusError, Interaction


def split_by_scenario(
    interactions: list[Interaction],
    ratios: tuple[float, ...],
    seed: int = 0,
) -> tuple[list[Interaction], ...]:
    """Partition interactions into scenario-disjoint splits approximating ``ratios``.

    Scenarios are sorted by interaction count (ties shuffled by ``seed``) and
    dealt, largest first, to the split with the largest remaining deficit, so
    heavy and light scenarios spread across all splits deterministically.
    """
    if not ratios or any(r <= 0 for r in ratios):
        raise CorpusError("ratios must be positive")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise CorpusError(f"ratios sum to {sum(ratios)}, expected 1")

    by_scenario: dict[str, list[Interaction]] = {}
    for interaction in interactions:
        by_scenario.setdefault(interaction.scenario_id, []).append(interaction)
    if len(by_scenario) < len(ratios):
        raise CorpusError(
            f"{len(by_scenario)} scenarios cannot fill {len(ratios)} splits"
        )

    groups = list(by_scenario.items())
    random.Random(seed).shuffle(groups)
    groups.sort(key=lambda kv: -len(kv[1]))

    splits: list[list[Interaction]] = [[] for _ in ratios]
    assigned = [0] * len(ratios)
    total = 0
    for _, group in groups:
        deficits = [ratios[i] * (total + len(group)) - assigned[i] for i in range(len(ratios))]
        target = max(range(len(ratios)), key=lambda i: (deficits[i], -i))
        splits[target].extend(group)
        assigned[target] += len(group)
        total += len(group)
    return tuple(splits)
