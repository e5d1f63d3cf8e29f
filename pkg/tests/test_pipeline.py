import json

import pytest

from aspector.candidates import SegmentedQuery, instance_aspects
from aspector.config import Config
from aspector.pipeline import parse_query_line, read_queries, run_query, run_suite, top_refinements


def pick(synth, zero_log):
    return next(p for p in synth.world.planted if p.zero_log == zero_log)


def test_popular_query_is_instance_driven(synth):
    p = synth.world.planted[0]
    rep = run_query(p.query, synth.stats, synth.kb, synth.corpus)
    assert rep.ok and len(rep.selected) <= 8
    assert rep.diagnostics["class"] == "Country"
    top = rep.selected[0].representative
    assert rep.provenance[top].p_inst > 0
    assert p.query.full not in rep.provenance


def test_zero_log_query_gets_class_patterns(synth):
    p = pick(synth, True)
    rep = run_query(p.query, synth.stats, synth.kb, synth.corpus)
    assert rep.ok
    for g in rep.selected:
        prov = rep.provenance[g.representative]
        assert prov.p_inst == 0 and prov.p_class > 0 and prov.origin == "propagated"
    # entity-free follow-ups of class members propagate literally; the head is instantiated patterns
    assert sum(p.query.entity in g.representative for g in rep.selected[:5]) >= 4


def test_k_zero_matches_no_propagation(synth):
    p = synth.world.planted[1]
    a = run_query(p.query, synth.stats, synth.kb, synth.corpus, Config(K=0.0)).dumps()
    b = run_query(p.query, synth.stats, synth.kb, synth.corpus, Config(K=0.0), propagate=False).dumps()
    assert a == b


def test_unknown_entity_reports_empty(synth):
    rep = run_query(SegmentedQuery.of("atlantis"), synth.stats, synth.kb, synth.corpus)
    assert not rep.ok and rep.to_json()["status"] == "empty"
    assert rep.diagnostics["excluded_entities"] == ["atlantis"]


def test_grouping_only_changes_structure(synth):
    p = synth.world.planted[2]
    g = run_query(p.query, synth.stats, synth.kb, synth.corpus)
    u = run_query(p.query, synth.stats, synth.kb, synth.corpus, group=False)
    assert [c.label for c in g.clusters] == [c.label for c in u.clusters]


def test_every_candidate_lands_in_one_cluster(synth):
    cfg = Config()
    for p in synth.world.planted[:10]:
        rep = run_query(p.query, synth.stats, synth.kb, synth.corpus, cfg)
        members = [a for c in rep.clusters for a in c.members]
        assert len(members) == len(set(members))
        assert set(members) == set(rep.provenance)
        own = {c.surface for c in instance_aspects(synth.stats, p.query, cfg.candidate_cap)} - {p.query.full}
        assert own <= set(members)


def test_timing_only_on_request(synth):
    q = synth.world.planted[0].query
    assert "seconds" not in run_query(q, synth.stats, synth.kb, synth.corpus).diagnostics
    assert "seconds" in run_query(q, synth.stats, synth.kb, synth.corpus, timing=True).diagnostics


def test_report_json_and_text(synth):
    rep = run_query(synth.world.planted[0].query, synth.stats, synth.kb, synth.corpus)
    obj = json.loads(rep.dumps())
    assert [s["rank"] for s in obj["selected"]] == list(range(1, len(rep.selected) + 1))
    assert rep.render_text().startswith("aspects for: vietnam travel")


def test_top_refinements(synth):
    q = synth.world.planted[0].query
    refs = top_refinements(synth.stats, q, 8)
    assert len(refs) == 8
    assert all(synth.stats.f_s(q.full, r) > 0 for r in refs)


def test_query_lines(tmp_path):
    assert parse_query_line("Vietnam Travel\tvietnam\ttravel") == SegmentedQuery.of("vietnam", "travel")
    assert parse_query_line("laos\tlaos") == SegmentedQuery.of("laos")
    with pytest.raises(ValueError):
        parse_query_line("only")
    (tmp_path / "q.tsv").write_text("# comment\nlaos\tlaos\n\n")
    assert read_queries(tmp_path / "q.tsv") == [SegmentedQuery.of("laos")]


def test_empty_suite(synth, tmp_path):
    res = run_suite([], synth.stats, synth.kb, synth.corpus, outdir=tmp_path / "out")
    assert res.reports == [] and list((tmp_path / "out").iterdir()) == []


def test_suite_outputs(synth, tmp_path):
    qs = synth.world.queries[:3]
    res = run_suite(qs, synth.stats, synth.kb, synth.corpus, outdir=tmp_path, threads=2)
    assert not res.failures
    assert len(list((tmp_path / "reports").glob("*.json"))) == 3
    lines = (tmp_path / "nsim.csv").read_text().splitlines()
    assert lines[0].startswith("query,n_selected") and len(lines) == 4
