"""Class knowledge base: entity classes, redirects and disambiguation terms."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .logmodel import normalize_query


class KBError(ValueError):
    pass


def _rows(lines: Iterable[str], ncols: int, source: str):
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != ncols:
            raise KBError(f"{source}:{lineno}: expected {ncols} tab-separated columns")
        yield parts


@dataclass(frozen=True)
class KnowledgeBase:
    entity_class: dict[str, str]
    redirects: dict[str, str] = field(default_factory=dict)
    ambiguous: frozenset[str] = frozenset()

    @property
    def class_members(self) -> dict[str, frozenset[str]]:
        members: dict[str, set[str]] = {}
        for e, c in self.entity_class.items():
            members.setdefault(c, set()).add(e)
        return {c: frozenset(m) for c, m in members.items()}

    def members_of(self, cls: str) -> list[str]:
        key = cls.casefold()
        return sorted(e for e, c in self.entity_class.items() if c.casefold() == key)

    def resolve(self, term: str) -> str:
        return self.redirects.get(term, term)

    def lookup_class(self, term: str) -> str | None:
        """Class of ``term`` after redirects; ``None`` for ambiguous or unknown terms."""
        t = self.resolve(term)
        if term in self.ambiguous or t in self.ambiguous:
            return None
        return self.entity_class.get(t)


def build_kb(
    entity_rows: Iterable[tuple[str, str]],
    redirect_rows: Iterable[tuple[str, str]] = (),
    disambig_terms: Iterable[str] = (),
) -> KnowledgeBase:
    entity_class: dict[str, str] = {}
    display: dict[str, str] = {}  # casefolded class name -> first spelling seen
    for raw_entity, raw_cls in entity_rows:
        entity = normalize_query(raw_entity)
        cls = raw_cls.strip()
        if not entity or not cls:
            continue
        cls = display.setdefault(cls.casefold(), cls)
        prev = entity_class.get(entity)
        if prev is not None and prev != cls:
            raise KBError(f"entity {entity!r} listed with conflicting classes {prev!r} and {cls!r}")
        entity_class[entity] = cls

    hops: dict[str, str] = {}
    for raw_alias, raw_target in redirect_rows:
        alias, target = normalize_query(raw_alias), normalize_query(raw_target)
        if alias and target and alias != target:
            hops[alias] = target

    ambiguous = frozenset(t for t in (normalize_query(x) for x in disambig_terms) if t)
    # a disambiguation page is never an alias of one article
    hops = {a: t for a, t in hops.items() if a not in ambiguous}

    redirects = {}
    for alias in sorted(hops):
        chain = [alias]
        cur = hops[alias]
        while cur in hops:
            if cur in chain:
                cycle = chain[chain.index(cur):] + [cur]
                raise KBError("redirect cycle: " + " -> ".join(cycle))
            chain.append(cur)
            cur = hops[cur]
        redirects[alias] = cur
    return KnowledgeBase(entity_class, redirects, ambiguous)


def load_kb(entities_path, redirects_path=None, disambig_path=None) -> KnowledgeBase:
    with open(entities_path, encoding="utf-8") as fh:
        ents = list(_rows(fh, 2, str(entities_path)))
    reds = []
    if redirects_path:
        with open(redirects_path, encoding="utf-8") as fh:
            reds = list(_rows(fh, 2, str(redirects_path)))
    terms = []
    if disambig_path:
        with open(disambig_path, encoding="utf-8") as fh:
            terms = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    return build_kb(ents, reds, terms)


def dump_kb(kb: KnowledgeBase, directory: str | Path) -> tuple[Path, Path, Path]:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = d / "entities.tsv", d / "redirects.tsv", d / "disambig.txt"
    with open(paths[0], "w", encoding="utf-8", newline="\n") as fh:
        for e in sorted(kb.entity_class):
            fh.write(f"{e}\t{kb.entity_class[e]}\n")
    with open(paths[1], "w", encoding="utf-8", newline="\n") as fh:
        for a in sorted(kb.redirects):
            fh.write(f"{a}\t{kb.redirects[a]}\n")
    with open(paths[2], "w", encoding="utf-8", newline="\n") as fh:
        for t in sorted(kb.ambiguous):
            fh.write(f"{t}\n")
    return paths
