"""End-to-end aspect computation for single queries and query suites."""

from __future__ import annotations

import json
import logging
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .candidates import SegmentedQuery, instance_aspects, instantiate, pattern_distribution, refinements
from .config import Config
from .dedup import AspectCluster, cluster, similarity_matrix
from .evaluation import MetricUndefined, TopicModel, build_topic_model, coverage_overlap, format_csv, nsim
from .grouping import AspectGroup, group_by_class
from .kb import KnowledgeBase
from .logmodel import LogStats, normalize_query
from .propagation import build_graph, run_passes
from .retrieval import Corpus
from .selection import SelectionInput, select

log = logging.getLogger(__name__)


@dataclass
class Provenance:
    p_r: float = 0.0
    p_ss: float = 0.0
    p_inst: float = 0.0
    p_class: float = 0.0
    p: float = 0.0
    origin: str = "propagated"


@dataclass
class AspectReport:
    query: SegmentedQuery
    selected: list[AspectGroup]
    clusters: list[AspectCluster]
    provenance: dict[str, Provenance]
    diagnostics: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return bool(self.selected)

    def to_json(self) -> dict:
        return {
            "query": {"full": self.query.full, "entity": self.query.entity, "property": self.query.property},
            "status": "ok" if self.ok else "empty",
            "selected": [
                {
                    "rank": i + 1,
                    "label": g.display_label,
                    "representative": g.representative,
                    "score": g.group_score,
                    "is_vertical": g.is_vertical,
                    "members": [c.label for c in g.members],
                    "member_entities": list(g.member_entities),
                }
                for i, g in enumerate(self.selected)
            ],
            "clusters": [
                {"label": c.label, "label_score": c.label_score, "members": list(c.members)}
                for c in self.clusters
            ],
            "provenance": {
                s: {
                    "p_r": p.p_r, "p_ss": p.p_ss, "p_inst": p.p_inst,
                    "p_class": p.p_class, "p": p.p, "origin": p.origin,
                }
                for s, p in sorted(self.provenance.items())
            },
            "diagnostics": self.diagnostics,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=False) + "\n"

    def render_text(self) -> str:
        lines = [f"aspects for: {self.query.full}"]
        if not self.selected:
            lines.append("  (no aspects)")
        for i, g in enumerate(self.selected, 1):
            extra = ""
            if g.is_vertical:
                extra = " (" + ", ".join(c.label for c in g.members) + ")"
            lines.append(f"{i:3d}. {g.display_label}{extra}  [{g.group_score:.4f}]")
        return "\n".join(lines) + "\n"


def member_queries(q: SegmentedQuery, kb: KnowledgeBase, cls: str) -> list[SegmentedQuery]:
    own = kb.resolve(q.entity)
    return [q if e == own else q.with_entity(e) for e in kb.members_of(cls)]


def smoothed_aspects(q: SegmentedQuery, stats: LogStats, kb: KnowledgeBase, config: Config, propagate: bool = True):
    """Candidate surfaces with provenance, before deduplication.

    With ``K == 0`` the class term vanishes, so propagation is skipped
    outright. Returns ``(provenance by surface, excluded entities, class)``.
    """
    own = {c.canonical: c for c in instance_aspects(stats, q, config.candidate_cap)} if q.full else {}
    cls = kb.lookup_class(q.entity)
    p_class: dict[str, float] = {}
    excluded: list[str] = []
    if cls is None or not propagate or config.K == 0:
        p = {pat: c.p_inst for pat, c in own.items()}
        if cls is None:
            excluded.append(q.entity)
    else:
        members = member_queries(q, kb, cls)
        dists = {
            m: pattern_distribution(instance_aspects(stats, m, config.candidate_cap)) for m in members
        }
        graph = build_graph(kb, members, config.K)
        excluded.extend(x.entity for x in graph.excluded)
        state, classes = run_passes(graph, dists, config.variant, config.K, passes=2)
        p = state.get(q, {pat: c.p_inst for pat, c in own.items()})
        node = graph.instance_class.get(q)
        if node is not None:
            p_class = classes[node].mixing_weights()

    prov: dict[str, Provenance] = {}
    for pattern in sorted(set(p) | set(own)):
        surface = instantiate(pattern, q.entity)
        if surface == q.full:
            continue
        rec = prov.setdefault(surface, Provenance())
        c = own.get(pattern)
        if c is not None:
            rec.p_r += c.p_r
            rec.p_ss += c.p_ss
            rec.p_inst += c.p_inst
            rec.origin = c.origin
        rec.p_class += p_class.get(pattern, 0.0)
        rec.p += p.get(pattern, 0.0)
    prov = {s: r for s, r in prov.items() if r.p > 0.0}
    return prov, excluded, cls


def run_query(
    q: SegmentedQuery,
    stats: LogStats,
    kb: KnowledgeBase,
    corpus: Corpus,
    config: Config = Config(),
    group: bool = True,
    propagate: bool = True,
    timing: bool = False,
) -> AspectReport:
    t0 = time.perf_counter()
    prov, excluded, cls = smoothed_aspects(q, stats, kb, config, propagate)
    ranked = sorted(prov, key=lambda s: (-prov[s].p, s))[: config.candidate_cap]
    prov = {s: prov[s] for s in ranked}
    diagnostics = {"class": cls, "excluded_entities": sorted(set(excluded)), "empty_retrievals": []}
    if not ranked:
        diagnostics["reason"] = "no candidates from the log and no class to propagate from"
        return AspectReport(q, [], [], {}, diagnostics)

    matrix = similarity_matrix(ranked, corpus, config.m)
    scores = {s: prov[s].p for s in ranked}
    clusters = cluster(matrix, scores, config.sigma)
    if group:
        groups = group_by_class(clusters, kb, q.entity, q.full)
    else:
        groups = [AspectGroup(c.label, (c,), c.label_score) for c in clusters]
    reps = [g.representative for g in groups]
    selected = select(SelectionInput(tuple(groups), matrix.restrict(reps), config.n))
    diagnostics["empty_retrievals"] = sorted(matrix.empty)
    if timing:
        diagnostics["seconds"] = time.perf_counter() - t0
    return AspectReport(q, selected, clusters, prov, diagnostics)


def top_refinements(stats: LogStats, q: SegmentedQuery, n: int) -> list[str]:
    pr = refinements(stats, q.full)
    return sorted(pr, key=lambda s: (-pr[s], s))[:n]


def parse_query_line(line: str) -> SegmentedQuery:
    parts = line.rstrip("\r\n").split("\t")
    if len(parts) not in (2, 3):
        raise ValueError(f"expected full<TAB>entity[<TAB>property], got {line!r}")
    full, entity = normalize_query(parts[0]), normalize_query(parts[1])
    prop = normalize_query(parts[2]) if len(parts) == 3 else ""
    return SegmentedQuery(full, entity, prop or None)


def read_queries(path: str | Path) -> list[SegmentedQuery]:
    with open(path, encoding="utf-8") as fh:
        return [parse_query_line(ln) for ln in fh if ln.strip() and not ln.startswith("#")]


def _slug(text: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", text.lower()).strip("-") or "query"


def _metric(fn):
    try:
        return fn()
    except MetricUndefined:
        return ""


@dataclass
class SuiteResult:
    reports: list[AspectReport | None]
    failures: list[tuple[str, str]]
    nsim_rows: list[list]
    coverage_rows: list[list]


def run_suite(
    queries: Sequence[SegmentedQuery],
    stats: LogStats,
    kb: KnowledgeBase,
    corpus: Corpus,
    config: Config = Config(),
    outdir: str | Path | None = None,
    threads: int = 1,
    model: TopicModel | None = None,
) -> SuiteResult:
    """Run every query, then write one JSON and text report each plus metric CSVs.

    Results are collected in query order, so output bytes do not depend on
    ``threads``.
    """
    queries = list(queries)
    reports: list[AspectReport | None] = [None] * len(queries)
    failures: list[tuple[str, str]] = []
    if queries and model is None:
        model = build_topic_model(corpus, config.topic_T)

    def work(i):
        return run_query(queries[i], stats, kb, corpus, config)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        futures = [pool.submit(work, i) for i in range(len(queries))]
        for i, fut in enumerate(futures):
            try:
                reports[i] = fut.result()
            except Exception as exc:  # keep the suite going, record the failure
                log.error("query %r failed: %s", queries[i].full, exc)
                failures.append((queries[i].full, f"{type(exc).__name__}: {exc}"))

    nsim_rows, cov_rows = [], []
    for q, rep in zip(queries, reports):
        if rep is None:
            continue
        chosen = [g.representative for g in rep.selected]
        refs = top_refinements(stats, q, config.n)
        sel = _metric(lambda: nsim(chosen, corpus, model, config.m).nsim)
        raw = _metric(lambda: nsim(refs, corpus, model, config.m).nsim)
        nsim_rows.append([q.full, len(chosen), sel, len(refs), raw])
        cov = coverage_overlap(q.full, chosen, corpus, config.k, config.N)
        cov_rows.append([q.full, config.k, config.N, cov.overlap, int(cov.vacuous), len(cov.aspect_docs), len(cov.new_docs)])

    result = SuiteResult(reports, failures, nsim_rows, cov_rows)
    if outdir is not None:
        write_suite(result, queries, outdir)
    return result


NSIM_HEADER = ["query", "n_selected", "nsim_selected", "n_refinements", "nsim_refinements"]
COVERAGE_HEADER = ["query", "k", "N", "overlap", "vacuous", "aspect_docs", "new_docs"]


def write_suite(result: SuiteResult, queries: Sequence[SegmentedQuery], outdir: str | Path) -> None:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    if not queries:
        return
    rep_dir = out / "reports"
    rep_dir.mkdir(exist_ok=True)
    for i, (q, rep) in enumerate(zip(queries, result.reports)):
        if rep is None:
            continue
        stem = f"{i:04d}_{_slug(q.full)}"
        (rep_dir / f"{stem}.json").write_text(rep.dumps(), encoding="utf-8")
        (rep_dir / f"{stem}.txt").write_text(rep.render_text(), encoding="utf-8")
    (out / "nsim.csv").write_text(format_csv(NSIM_HEADER, result.nsim_rows), encoding="utf-8")
    (out / "coverage.csv").write_text(format_csv(COVERAGE_HEADER, result.coverage_rows), encoding="utf-8")
    if result.failures:
        with open(out / "failures.tsv", "w", encoding="utf-8", newline="\n") as fh:
            for q, err in result.failures:
                fh.write(f"{q}\t{err}\n")
