"""Instance-level candidate aspects from refinements and super-strings."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .logmodel import LogStats

ENTITY_MARK = "<E>"
DEFAULT_CAP = 30


@dataclass(frozen=True)
class SegmentedQuery:
    """A query split into an entity and an optional property."""

    full: str
    entity: str
    property: str | None = None

    def __post_init__(self):
        expected = self.entity if not self.property else f"{self.entity} {self.property}"
        if self.full != expected:
            raise ValueError(f"{self.full!r} is not entity {self.entity!r} + property {self.property!r}")

    @classmethod
    def of(cls, entity: str, property: str | None = None) -> "SegmentedQuery":
        prop = property or None
        return cls(entity if not prop else f"{entity} {prop}", entity, prop)

    def with_entity(self, entity: str) -> "SegmentedQuery":
        return SegmentedQuery.of(entity, self.property)


@dataclass
class CandidateAspect:
    surface: str
    canonical: str
    p_r: float = 0.0
    p_ss: float = 0.0
    p_inst: float = 0.0
    origin: str = "refinement"


def _find(tokens: list[str], sub: list[str], start: int = 0) -> int:
    k = len(sub)
    for i in range(start, len(tokens) - k + 1):
        if tokens[i:i + k] == sub:
            return i
    return -1


def contains_tokens(text: str, sub: str) -> bool:
    """True when ``sub``'s tokens occur contiguously inside ``text``'s tokens."""
    return bool(sub) and _find(text.split(), sub.split()) >= 0


def canonicalize(surface: str, entity: str) -> str:
    """Replace every token-aligned occurrence of ``entity`` with the placeholder."""
    tokens = surface.split()
    ent = entity.split()
    if not ent:
        return surface
    out = []
    i = 0
    while i < len(tokens):
        if tokens[i:i + len(ent)] == ent:
            out.append(ENTITY_MARK)
            i += len(ent)
        else:
            out.append(tokens[i])
            i += 1
    return " ".join(out)


def instantiate(pattern: str, entity: str) -> str:
    return " ".join(entity if t == ENTITY_MARK else t for t in pattern.split())


def refinements(stats: LogStats, q: str) -> dict[str, float]:
    row = stats.follows.get(q)
    if not row:
        return {}
    total = sum(row.values())
    return {qj: c / total for qj, c in sorted(row.items())}


def superstring_counts(stats: LogStats, q: str) -> dict[str, int]:
    toks = q.split()
    if not toks:
        return {}
    # the rarest token narrows the scan
    pool = min((stats.queries_with_token(t) for t in toks), key=len)
    return {
        qj: stats.f(qj)
        for qj in sorted(pool)
        if qj != q and _find(qj.split(), toks) >= 0
    }


def superstrings(stats: LogStats, q: str) -> dict[str, float]:
    """Score super-strings as pseudo-refinements.

    The query's own count sits in the denominator, which keeps the scores a
    conservative lower bound that never sums to 1 or more.
    """
    counts = superstring_counts(stats, q)
    if not counts:
        return {}
    denom = stats.f(q) + sum(counts.values())
    return {qj: c / denom for qj, c in counts.items()}


def instance_aspects(stats: LogStats, q: SegmentedQuery, cap: int = DEFAULT_CAP) -> list[CandidateAspect]:
    if cap < 1:
        raise ValueError("cap must be >= 1")
    pr = refinements(stats, q.full)
    pss = superstrings(stats, q.full)
    cands = []
    for s in sorted(set(pr) | set(pss)):
        r, ss = pr.get(s, 0.0), pss.get(s, 0.0)
        if s in pr and s in pss:
            origin = "both"
        elif s in pr:
            origin = "refinement"
        else:
            origin = "superstring"
        cands.append(CandidateAspect(s, canonicalize(s, q.entity), r, ss, max(r, ss), origin))
    cands.sort(key=lambda c: (-c.p_inst, c.surface))
    kept = cands[:cap]
    total = math.fsum(c.p_inst for c in kept)
    for c in kept:
        c.p_inst = c.p_inst / total
    return kept


def pattern_distribution(cands: list[CandidateAspect]) -> dict[str, float]:
    return {c.canonical: c.p_inst for c in cands}
