"""Command-line entry point.

Exit status: 0 success, 1 usage error, 2 data error (missing or malformed
input, or a query that produced no aspects). Logs go to stderr; data goes to
files or stdout.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .candidates import SegmentedQuery, instance_aspects, pattern_distribution
from .config import Config, ConfigError, load_config
from .dedup import similarity_matrix
from .evaluation import (
    GoldClustering,
    MetricUndefined,
    build_topic_model,
    coverage_overlap,
    format_csv,
    nsim,
    pair_scores,
    parse_sigmas,
    read_gold,
    sigma_sweep,
)
from .kb import KBError, load_kb
from .logmodel import count_stats, normalize_query, read_log, sessionize
from .pipeline import member_queries, read_queries, run_query, run_suite
from .propagation import build_graph, class_node_label, run_passes, write_class_distributions
from .retrieval import CorpusError, index, read_cache, read_corpus
from .synthgen import FILES as WORLD_FILES
from .synthgen import default_world, generate, load_world_spec

log = logging.getLogger("aspector")

CONFIG_ENV = "ASPECTOR_CONFIG"

# flag -> config field
CONFIG_FLAGS = {
    "K": ("--K", float),
    "sigma": ("--sigma", float),
    "m": ("--m", int),
    "n": ("--n", int),
    "N": ("--N", int),
    "k": ("--k", int),
    "candidate_cap": ("--cap", int),
    "session_gap_seconds": ("--gap", int),
    "variant": ("--variant", str),
    "topic_T": ("--topic-T", int),
}


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_config_flags(p):
    g = p.add_argument_group("configuration overrides")
    for key, (flag, typ) in CONFIG_FLAGS.items():
        g.add_argument(flag, dest=f"cfg_{key}", type=typ, default=None, metavar=key.upper())


def _add_inputs(p, *names):
    p.add_argument("--world", help="directory produced by `synth`; supplies default input paths")
    for name in names:
        p.add_argument(f"--{name}", default=None)
    p.add_argument("--cache", default=None, help="pinned retrieval results (JSON lines)")


def _add_query(p, required=True):
    p.add_argument("--query", required=required, help="full query text")
    p.add_argument("--entity", help="entity span (default: the query minus --property)")
    p.add_argument("--property", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="aspector", description="Mine, propagate, deduplicate and select query aspects.")
    parser.add_argument("--config", default=None, help=f"key=value config file (default: ${CONFIG_ENV})")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("sessionize", help="split a query log into sessions (JSON lines)")
    _add_inputs(p, "log")
    p.add_argument("--out", default=None)
    _add_config_flags(p)

    p = sub.add_parser("candidates", help="instance-level candidate aspects for one query")
    _add_inputs(p, "log")
    _add_query(p)
    _add_config_flags(p)

    p = sub.add_parser("propagate", help="class aspect distributions and smoothed instance distributions")
    _add_inputs(p, "log", "entities", "redirects", "disambig", "queries")
    p.add_argument("--classes-out", default=None, help="write class distributions (TSV) here")
    p.add_argument("--out", default=None, help="write smoothed distributions (JSON) here instead of stdout")
    _add_config_flags(p)

    p = sub.add_parser("aspects", help="full aspect report for one query")
    _add_inputs(p, "log", "entities", "redirects", "disambig", "corpus")
    _add_query(p)
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--no-group", action="store_true")
    p.add_argument("--no-propagate", action="store_true")
    p.add_argument("--timing", action="store_true", help="include wall-clock seconds in diagnostics")
    _add_config_flags(p)

    p = sub.add_parser("suite", help="run every query in a query file")
    _add_inputs(p, "log", "entities", "redirects", "disambig", "corpus", "queries")
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=int, default=1)
    _add_config_flags(p)

    p = sub.add_parser("synth", help="generate a synthetic world")
    p.add_argument("--out", required=True)
    p.add_argument("--spec", default=None, help="WorldSpec JSON (default: built-in five-class world)")
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("eval-nsim", help="normalized inter-aspect topic similarity")
    _add_inputs(p, "corpus")
    p.add_argument("--aspects", nargs="+", required=True)
    _add_config_flags(p)

    p = sub.add_parser("eval-coverage", help="overlap of aspect results with the query's top N")
    _add_inputs(p, "corpus")
    p.add_argument("--query", required=True)
    p.add_argument("--aspects", nargs="+", required=True)
    _add_config_flags(p)

    p = sub.add_parser("eval-cluster-f", help="pair-decision F-measure of a clustering against gold")
    p.add_argument("--predicted", required=True, help="JSON lines {query, clusters}")
    p.add_argument("--gold", required=True, help="JSON lines {query, clusters}")

    p = sub.add_parser("sweep-sigma", help="mean F-measure of threshold clustering over a sigma range")
    _add_inputs(p, "corpus", "gold")
    p.add_argument("--sigmas", default="0.05:0.55:0.05", help="lo:hi:step (inclusive) or a comma list")
    _add_config_flags(p)
    return parser


def _path(args, name, required=True) -> Path | None:
    value = getattr(args, name, None)
    if value is None and getattr(args, "world", None):
        candidate = Path(args.world) / WORLD_FILES[name]
        if candidate.exists() or required:
            value = candidate
    if value is None:
        if required:
            raise UsageError(f"--{name} is required (or pass --world)")
        return None
    p = Path(value)
    if not p.is_file():
        raise DataError(f"no such file: {p}")
    return p


def _config(args) -> Config:
    path = args.config or os.environ.get(CONFIG_ENV) or None
    if path and not Path(path).is_file():
        raise DataError(f"no such file: {path}")
    overrides = {key: getattr(args, f"cfg_{key}", None) for key in CONFIG_FLAGS}
    return load_config(path, overrides)


def _query(args) -> SegmentedQuery:
    full = normalize_query(args.query)
    entity = normalize_query(args.entity) if args.entity else None
    prop = normalize_query(args.property) if args.property else None
    if entity is None:
        entity = full[: -len(prop) - 1] if prop and full.endswith(" " + prop) else full
    if not full:
        raise UsageError("--query is empty after normalization")
    expected = entity if not prop else f"{entity} {prop}"
    if expected != full:
        raise UsageError(f"query {full!r} is not entity {entity!r} plus property {prop!r}")
    return SegmentedQuery(full, entity, prop)


def _stats(args, cfg):
    return count_stats(sessionize(read_log(_path(args, "log")), cfg.session_gap_seconds))


def _kb(args):
    return load_kb(_path(args, "entities"), _path(args, "redirects", False), _path(args, "disambig", False))


def _corpus(args):
    docs = read_corpus(_path(args, "corpus"))
    cache_path = getattr(args, "cache", None)
    if cache_path and not Path(cache_path).is_file():
        raise DataError(f"no such file: {cache_path}")
    return index(docs, read_cache(cache_path) if cache_path else None)


def _emit(text: str, out: str | None = None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_sessionize(args) -> int:
    cfg = _config(args)
    sessions = sessionize(read_log(_path(args, "log")), cfg.session_gap_seconds)
    lines = [
        json.dumps({"user_id": s.user_id, "start": s.events[0].timestamp, "queries": list(s.queries)})
        for s in sessions
    ]
    _emit("".join(line + "\n" for line in lines), args.out)
    return 0


def cmd_candidates(args) -> int:
    cfg = _config(args)
    q = _query(args)
    cands = instance_aspects(_stats(args, cfg), q, cfg.candidate_cap)
    rows = [
        {"surface": c.surface, "canonical": c.canonical, "p_r": c.p_r, "p_ss": c.p_ss,
         "p_inst": c.p_inst, "origin": c.origin}
        for c in cands
    ]
    _emit(json.dumps({"query": q.full, "candidates": rows}, indent=2) + "\n")
    return 0


def cmd_propagate(args) -> int:
    cfg = _config(args)
    stats, kb = _stats(args, cfg), _kb(args)
    queries = read_queries(_path(args, "queries"))
    members = set()
    for q in queries:
        cls = kb.lookup_class(q.entity)
        members.update(member_queries(q, kb, cls) if cls else [q])
    dists = {m: pattern_distribution(instance_aspects(stats, m, cfg.candidate_cap)) for m in members}
    graph = build_graph(kb, members, cfg.K)
    for x in graph.excluded:
        log.info("no class for %r; left out of propagation", x.entity)
    state, classes = run_passes(graph, dists, cfg.variant, cfg.K, passes=2)
    if args.classes_out:
        write_class_distributions(classes.values(), args.classes_out)
    out = {}
    for q in queries:
        node = graph.instance_class.get(q)
        out[q.full] = {
            "class": class_node_label(node) if node else None,
            "p": state.get(q, dists.get(q, {})),
        }
    _emit(json.dumps(out, indent=2, sort_keys=True) + "\n", args.out)
    return 0


def cmd_aspects(args) -> int:
    cfg = _config(args)
    q = _query(args)
    report = run_query(
        q, _stats(args, cfg), _kb(args), _corpus(args), cfg,
        group=not args.no_group, propagate=not args.no_propagate, timing=args.timing,
    )
    _emit(report.dumps() if args.format == "json" else report.render_text())
    if not report.ok:
        log.error("no aspects for %r: %s", q.full, report.diagnostics.get("reason", ""))
        return 2
    return 0


def cmd_suite(args) -> int:
    cfg = _config(args)
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    queries = read_queries(_path(args, "queries"))
    if not queries:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        return 0
    result = run_suite(queries, _stats(args, cfg), _kb(args), _corpus(args), cfg, args.out, args.threads)
    if result.failures:
        log.warning("%d of %d queries failed; see failures.tsv", len(result.failures), len(queries))
    return 0


def cmd_synth(args) -> int:
    if args.spec:
        if not Path(args.spec).is_file():
            raise DataError(f"no such file: {args.spec}")
        spec = load_world_spec(args.spec)
        if args.seed is not None:
            spec.seed = args.seed
    else:
        spec = default_world(args.seed or 0)
    paths = generate(spec, args.out)
    log.info("wrote %d files to %s", len(paths), args.out)
    return 0


def cmd_eval_nsim(args) -> int:
    cfg = _config(args)
    corpus = _corpus(args)
    model = build_topic_model(corpus, cfg.topic_T)
    aspects = [normalize_query(a) for a in args.aspects]
    r = nsim(aspects, corpus, model, cfg.m)
    _emit(format_csv(["n", "asim", "isim", "nsim"], [[len(aspects), r.asim, r.isim, r.nsim]]))
    return 0


def cmd_eval_coverage(args) -> int:
    cfg = _config(args)
    corpus = _corpus(args)
    aspects = [normalize_query(a) for a in args.aspects]
    r = coverage_overlap(normalize_query(args.query), aspects, corpus, cfg.k, cfg.N)
    row = [args.query, cfg.k, cfg.N, r.overlap, int(r.vacuous), len(r.aspect_docs), len(r.new_docs)]
    _emit(format_csv(["query", "k", "N", "overlap", "vacuous", "aspect_docs", "new_docs"], [row]))
    return 0


def _read_partitions(path) -> list[GoldClustering]:
    if not Path(path).is_file():
        raise DataError(f"no such file: {path}")
    return read_gold(path)


def cmd_eval_cluster_f(args) -> int:
    predicted = {g.query: g for g in _read_partitions(args.predicted)}
    rows = []
    for g in _read_partitions(args.gold):
        p = predicted.get(g.query)
        if p is None:
            raise DataError(f"{args.predicted}: no clustering for {g.query!r}")
        s = pair_scores(p.clusters, g)
        rows.append([g.query, s.precision, s.recall, s.f])
    if rows:
        n = len(rows)
        rows.append(["mean"] + [sum(r[i] for r in rows) / n for i in (1, 2, 3)])
    _emit(format_csv(["query", "precision", "recall", "f"], rows))
    return 0


def cmd_sweep_sigma(args) -> int:
    cfg = _config(args)
    try:
        sigmas = parse_sigmas(args.sigmas)
    except ValueError as exc:
        raise UsageError(f"bad --sigmas {args.sigmas!r}: {exc}") from exc
    corpus = _corpus(args)
    cases = []
    for g in read_gold(_path(args, "gold")):
        matrix = similarity_matrix(g.aspects, corpus, cfg.m)
        # membership does not depend on label scores
        cases.append((matrix, {a: 1.0 for a in g.aspects}, g))
    _emit(format_csv(["sigma", "f"], sigma_sweep(cases, sigmas)))
    return 0


COMMANDS = {
    "sessionize": cmd_sessionize,
    "candidates": cmd_candidates,
    "propagate": cmd_propagate,
    "aspects": cmd_aspects,
    "suite": cmd_suite,
    "synth": cmd_synth,
    "eval-nsim": cmd_eval_nsim,
    "eval-coverage": cmd_eval_coverage,
    "eval-cluster-f": cmd_eval_cluster_f,
    "sweep-sigma": cmd_sweep_sigma,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"aspector: error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"aspector: error: no such file: {exc.filename}", file=sys.stderr)
        return 2
    except (DataError, ConfigError, KBError, CorpusError, MetricUndefined, ValueError, KeyError) as exc:
        print(f"aspector: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
