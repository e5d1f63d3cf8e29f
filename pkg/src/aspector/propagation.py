"""Class-based aspect propagation over the instance/class bipartite graph.

Instance nodes are segmented queries; class nodes are ``(class, property)``
pairs. Distributions are keyed by canonical patterns (the entity replaced by
``<E>``), which is what makes aspects of different instances comparable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .candidates import SegmentedQuery
from .kb import KnowledgeBase

AVERAGE = "average"
INDICATOR = "indicator"
VARIANTS = (AVERAGE, INDICATOR)
DEFAULT_K = 0.1

ClassNode = tuple[str, str | None]
Distribution = dict[str, float]


def class_node_label(node: ClassNode) -> str:
    cls, prop = node
    return cls if not prop else f"{cls}|{prop}"


def parse_class_node(label: str) -> ClassNode:
    cls, _, prop = label.partition("|")
    return cls, prop or None


@dataclass(frozen=True)
class BipartiteAspectGraph:
    instance_class: dict[SegmentedQuery, ClassNode]
    class_members: dict[ClassNode, tuple[SegmentedQuery, ...]]
    K: float = DEFAULT_K
    excluded: tuple[SegmentedQuery, ...] = ()

    @property
    def instance_nodes(self) -> frozenset[SegmentedQuery]:
        return frozenset(self.instance_class)

    @property
    def class_nodes(self) -> frozenset[ClassNode]:
        return frozenset(self.class_members)

    def weight(self, src, dst) -> float:
        """Edge weight: 1 from instance to its class, K from class to member, else 0."""
        if isinstance(src, SegmentedQuery):
            return 1.0 if self.instance_class.get(src) == dst else 0.0
        if isinstance(dst, SegmentedQuery) and self.instance_class.get(dst) == src:
            return self.K
        return 0.0


@dataclass(frozen=True)
class ClassAspectDistribution:
    class_node: ClassNode
    weights: Distribution
    variant: str = AVERAGE

    def mixing_weights(self) -> Distribution:
        """Weights as mixed into instance nodes; indicator counts are renormalized."""
        if self.variant != INDICATOR:
            return self.weights
        total = math.fsum(self.weights.values())
        if total <= 0:
            return {}
        return {p: w / total for p, w in self.weights.items()}


def build_graph(kb: KnowledgeBase, queries, K: float = DEFAULT_K) -> BipartiteAspectGraph:
    if K < 0:
        raise ValueError("K must be nonnegative")
    instance_class = {}
    members: dict[ClassNode, list[SegmentedQuery]] = {}
    excluded = []
    for q in sorted(set(queries), key=lambda q: q.full):
        cls = kb.lookup_class(q.entity)
        if cls is None:
            excluded.append(q)
            continue
        node = (cls, q.property)
        instance_class[q] = node
        members.setdefault(node, []).append(q)
    return BipartiteAspectGraph(
        instance_class,
        {node: tuple(m) for node, m in sorted(members.items(), key=lambda kv: class_node_label(kv[0]))},
        K,
        tuple(excluded),
    )


def class_aspects(
    graph: BipartiteAspectGraph,
    instance_dists: Mapping[SegmentedQuery, Mapping[str, float]],
    variant: str = INDICATOR,
) -> list[ClassAspectDistribution]:
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    out = []
    for node, members in graph.class_members.items():
        size = len(members)
        terms: dict[str, list[float]] = {}
        for q in members:
            for pattern, v in instance_dists.get(q, {}).items():
                if variant == AVERAGE:
                    terms.setdefault(pattern, []).append(v)
                elif v > 0:
                    terms.setdefault(pattern, []).append(1.0)
        weights = {p: math.fsum(vs) / size for p, vs in sorted(terms.items())}
        out.append(ClassAspectDistribution(node, weights, variant))
    return out


def smooth(instance_dist: Mapping[str, float], class_dist: ClassAspectDistribution | Mapping[str, float], K: float) -> Distribution:
    """Mix an instance distribution with its class distribution.

    ``p = (p_inst + K * p_class) / (1 + K)`` over the union of supports;
    patterns whose mixed value is exactly zero are dropped, so ``K == 0``
    returns ``instance_dist`` unchanged.
    """
    if K < 0:
        raise ValueError("K must be nonnegative")
    if isinstance(class_dist, ClassAspectDistribution):
        cw = class_dist.mixing_weights()
    else:
        cw = class_dist
    out = {}
    for pattern in sorted(set(instance_dist) | set(cw)):
        v = (instance_dist.get(pattern, 0.0) + K * cw.get(pattern, 0.0)) / (1.0 + K)
        if v != 0.0:
            out[pattern] = v
    return out


def run_passes(
    graph: BipartiteAspectGraph,
    instance_dists: Mapping[SegmentedQuery, Mapping[str, float]],
    variant: str = INDICATOR,
    K: float | None = None,
    passes: int = 2,
) -> tuple[dict[SegmentedQuery, Distribution], dict[ClassNode, ClassAspectDistribution]]:
    """Alternate class updates (odd passes) and instance updates (even passes).

    Class nodes aggregate the current instance state under the averaging
    variant. The indicator variant counts instances whose log-derived (seed)
    distribution has the pattern; propagated mass is not an observation.
    Instance nodes always re-inject their seed distribution.
    """
    K = graph.K if K is None else K
    seeds = {q: dict(instance_dists.get(q, {})) for q in graph.instance_class}
    state = {q: dict(d) for q, d in seeds.items()}
    classes: dict[ClassNode, ClassAspectDistribution] = {}
    for step in range(1, passes + 1):
        if step % 2:
            source = state if variant == AVERAGE else seeds
            classes = {c.class_node: c for c in class_aspects(graph, source, variant)}
        else:
            state = {
                q: smooth(seeds[q], classes[graph.instance_class[q]], K)
                for q in sorted(seeds, key=lambda q: q.full)
            }
    return state, classes


def propagate(
    graph: BipartiteAspectGraph,
    instance_dists: Mapping[SegmentedQuery, Mapping[str, float]],
    variant: str = INDICATOR,
    K: float | None = None,
) -> dict[SegmentedQuery, Distribution]:
    """Two passes suffice because every instance hangs off exactly one class node."""
    state, _ = run_passes(graph, instance_dists, variant, K, passes=2)
    return state


def write_class_distributions(dists, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for d in sorted(dists, key=lambda d: class_node_label(d.class_node)):
            label = class_node_label(d.class_node)
            for pattern, w in sorted(d.weights.items()):
                fh.write(f"{label}\t{pattern}\t{w!r}\n")


def read_class_distributions(path: str | Path, variant: str = INDICATOR) -> list[ClassAspectDistribution]:
    weights: dict[ClassNode, dict[str, float]] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\r\n")
            if not line or line.startswith("#"):
                continue
            label, pattern, w = line.split("\t")
            weights.setdefault(parse_class_node(label), {})[pattern] = float(w)
    return [ClassAspectDistribution(node, w, variant) for node, w in weights.items()]
