"""Grouping of non-redundant aspects that name entities of one KB class."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .candidates import _find
from .dedup import AspectCluster
from .kb import KnowledgeBase

MIN_GROUP = 2


@dataclass(frozen=True)
class AspectGroup:
    display_label: str
    members: tuple[AspectCluster, ...]
    group_score: float
    is_vertical: bool = False
    member_entities: tuple[str, ...] = ()

    @property
    def representative(self) -> str:
        """Surface whose retrieval stands in for the whole group."""
        return self.members[0].label

    @property
    def surfaces(self) -> list[str]:
        return [a for c in self.members for a in c.members]


def strip_tokens(label: str, sub: str) -> str:
    toks, s = label.split(), sub.split()
    i = _find(toks, s) if s else -1
    if i < 0:
        return label
    return " ".join(toks[:i] + toks[i + len(s):])


def aspect_entity(label: str, kb: KnowledgeBase, entity: str, full_query: str | None = None) -> tuple[str, str] | None:
    """Resolve the entity an aspect label names, as ``(canonical, class)``.

    The query itself is stripped from the label first (falling back to the
    query entity alone), so ``vietnam hanoi`` resolves through ``hanoi``.
    """
    rest = label
    if full_query and _find(label.split(), full_query.split()) >= 0:
        rest = strip_tokens(label, full_query)
    else:
        rest = strip_tokens(label, entity)
    if not rest or rest in kb.ambiguous:
        return None
    cls = kb.lookup_class(rest)
    if cls is None:
        return None
    return kb.resolve(rest), cls


def group_by_class(
    clusters: Sequence[AspectCluster],
    kb: KnowledgeBase,
    entity: str,
    full_query: str | None = None,
) -> list[AspectGroup]:
    ordered = sorted(clusters, key=lambda c: (-c.label_score, c.label))
    resolved = {c.label: aspect_entity(c.label, kb, entity, full_query) for c in ordered}
    by_class: dict[str, list[AspectCluster]] = {}
    for c in ordered:
        r = resolved[c.label]
        if r is not None:
            by_class.setdefault(r[1].casefold(), []).append(c)

    groups = []
    done = set()
    for c in ordered:
        if c.label in done:
            continue
        r = resolved[c.label]
        peers = by_class.get(r[1].casefold(), []) if r else []
        if len(peers) >= MIN_GROUP:
            groups.append(AspectGroup(
                display_label=r[1],
                members=tuple(peers),
                group_score=max(p.label_score for p in peers),
                is_vertical=True,
                member_entities=tuple(resolved[p.label][0] for p in peers),
            ))
            done.update(p.label for p in peers)
        else:
            groups.append(AspectGroup(c.label, (c,), c.label_score))
            done.add(c.label)
    groups.sort(key=lambda g: (-g.group_score, g.display_label))
    return groups
