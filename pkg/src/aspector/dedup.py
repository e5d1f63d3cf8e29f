"""Redundant-aspect elimination by threshold-graph connected components."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .retrieval import DEFAULT_M, Corpus, result_set_similarities, search

DEFAULT_SIGMA = 0.35


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    aspects: tuple[str, ...]
    values: np.ndarray
    empty: frozenset[str] = frozenset()  # aspects whose search returned nothing

    def __post_init__(self):
        n = len(self.aspects)
        if self.values.shape != (n, n):
            raise ValueError("matrix shape does not match aspect count")

    def index(self, aspect: str) -> int:
        return self.aspects.index(aspect)

    def get(self, a: str, b: str) -> float:
        return float(self.values[self.index(a), self.index(b)])

    def restrict(self, aspects: Sequence[str]) -> "SimilarityMatrix":
        idx = [self.index(a) for a in aspects]
        return SimilarityMatrix(
            tuple(aspects), self.values[np.ix_(idx, idx)].copy(), self.empty & frozenset(aspects)
        )


@dataclass(frozen=True)
class AspectCluster:
    label: str
    members: tuple[str, ...]
    label_score: float


def similarity_matrix(aspects: Sequence[str], corpus: Corpus, m: int = DEFAULT_M) -> SimilarityMatrix:
    if len(set(aspects)) != len(aspects):
        raise ValueError("aspects must be distinct")
    results = [search(corpus, a, m) for a in aspects]
    values = result_set_similarities(corpus, results) if aspects else np.zeros((0, 0))
    values.setflags(write=False)
    return SimilarityMatrix(
        tuple(aspects), values, frozenset(a for a, r in zip(aspects, results) if not r.docs)
    )


def components(n: int, edges) -> list[list[int]]:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def cluster(matrix: SimilarityMatrix, scores: Mapping[str, float], sigma: float = DEFAULT_SIGMA) -> list[AspectCluster]:
    """Connected components of the graph with an edge wherever sim > sigma.

    Each cluster is labeled by its highest-scored member (ties go to the
    lexicographically smallest); clusters come back best label first.
    """
    if not 0.0 <= sigma <= 1.0:
        raise ValueError("sigma must lie in [0, 1]")
    n = len(matrix.aspects)
    vals = matrix.values
    ii, jj = np.nonzero(np.triu(vals > sigma, k=1))
    out = []
    for comp in components(n, zip(ii.tolist(), jj.tolist())):
        members = sorted(matrix.aspects[i] for i in comp)
        label = min(members, key=lambda a: (-scores.get(a, 0.0), a))
        out.append(AspectCluster(label, tuple(members), scores.get(label, 0.0)))
    out.sort(key=lambda c: (-c.label_score, c.label))
    return out
