"""Greedy ranking that trades aspect score against similarity to earlier picks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .dedup import SimilarityMatrix
from .grouping import AspectGroup

DEFAULT_N = 8


def greedy_order(labels: Sequence[str], scores: Sequence[float], sim) -> list[int]:
    """Rank items by repeatedly taking the best ``score / max-sim-to-picked``.

    ``sim[i][j]`` is indexable pairwise similarity. The opening pick is the
    top score. An item with zero similarity to everything picked has an
    unbounded ratio; such items go first, by score. Remaining ties fall to
    the lexicographically smallest label.
    """
    n = len(labels)
    if n == 0:
        return []
    remaining = list(range(n))
    first = min(remaining, key=lambda i: (-scores[i], labels[i]))
    order = [first]
    remaining.remove(first)
    nearest = {i: float(sim[i][first]) for i in remaining}

    def priority(i):
        s = nearest[i]
        if s <= 0.0:
            return (0, -scores[i], labels[i])
        return (1, -(scores[i] / s), labels[i])

    while remaining:
        nxt = min(remaining, key=priority)
        order.append(nxt)
        remaining.remove(nxt)
        for i in remaining:
            v = float(sim[i][nxt])
            if v > nearest[i]:
                nearest[i] = v
    return order


@dataclass(frozen=True)
class SelectionInput:
    groups: tuple[AspectGroup, ...]
    sim: SimilarityMatrix  # over group representatives
    n: int = DEFAULT_N


def select(inp: SelectionInput) -> list[AspectGroup]:
    if inp.n < 1:
        raise ValueError("n must be >= 1")
    groups = list(inp.groups)
    if not groups:
        raise ValueError("nothing to select from")
    idx = [inp.sim.index(g.representative) for g in groups]
    vals = inp.sim.values
    pair = [[vals[a, b] for b in idx] for a in idx]
    order = greedy_order([g.display_label for g in groups], [g.group_score for g in groups], pair)
    return [groups[i] for i in order[: inp.n]]
