import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aspector.dedup import SimilarityMatrix
from aspector.evaluation import (
    GoldClustering, MetricUndefined, _mean_cross, build_topic_model, coverage_overlap, format_csv, nsim,
    pair_f_measure, pair_scores, parse_sigmas, read_gold, sigma_sweep, tsim, write_gold,
)
from aspector.retrieval import Document, index

CORPUS = index([
    Document("a1", "apple", "fruit orchard red"),
    Document("a2", "apple", "fruit orchard green"),
    Document("b1", "boat", "sail harbor wind"),
    Document("b2", "boat", "sail harbor keel"),
    Document("z", "", "!!!"),
])


def test_topic_model_basics():
    m = build_topic_model(CORPUS, 3)
    assert m.T == 3
    a1, a2 = CORPUS.documents[:2]
    twin = Document("copy", a1.head, a1.snippet)
    assert np.allclose(m.project(twin), m.project(a1))
    assert tsim(a1, twin, m) == pytest.approx(1.0)
    assert tsim(a1, CORPUS.documents[4], m) == 0.0
    assert tsim(a1, a2, m) == tsim(a2, a1, m)
    with pytest.raises(ValueError):
        build_topic_model(index([]))


def test_one_document_model():
    m = build_topic_model(index([Document("x", "", "alpha beta"), Document("y", "", "beta gamma")]), 1)
    assert m.T == 1


def test_projection_is_linear():
    m = build_topic_model(CORPUS, 4)
    c = CORPUS
    combined = m.project_text("fruit sail sail")
    parts = c.idf[c.vocab["fruit"]] * m.term_vectors[c.vocab["fruit"]] + 2 * c.idf[c.vocab["sail"]] * m.term_vectors[c.vocab["sail"]]
    assert np.allclose(combined, parts)


def test_mean_cross_hand_computed():
    # one doc against two, with topic cosines 0.4 and 0.2
    u = np.array([[1.0, 0.0]])
    v = np.array([[0.4, math.sqrt(1 - 0.16)], [0.2, math.sqrt(1 - 0.04)]])
    assert _mean_cross(v, u) == pytest.approx(0.3)
    assert _mean_cross(u, u) == 1.0
    assert _mean_cross(u, np.array([[0.0, 1.0]])) == 0.0


def test_nsim_identical_and_orthogonal():
    m = build_topic_model(CORPUS, 4)
    same = index([Document("x", "apple", "fruit"), Document("y", "boat", "sail")], cache={"p": ["x"], "q": ["x"]})
    mm = build_topic_model(same, 2)
    assert nsim(["p", "q"], same, mm).nsim == pytest.approx(1.0)
    assert nsim(["apple", "boat"], CORPUS, m).nsim == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(MetricUndefined):
        nsim(["apple"], CORPUS, m)
    with pytest.raises(MetricUndefined):
        nsim(["nothing", "nada"], CORPUS, m)


def test_self_similarity_below_one():
    m = build_topic_model(CORPUS, 4)
    r = nsim(["apple", "boat"], CORPUS, m)
    assert r.isim < 1.0


def test_coverage():
    assert coverage_overlap("apple", ["apple"], CORPUS, 1, 2).overlap == 1.0
    r = coverage_overlap("apple", ["boat"], CORPUS, 1, 2)
    assert r.overlap == 0.0 and r.new_docs == ("b1",)
    v = coverage_overlap("apple", ["zzz"], CORPUS)
    assert v.vacuous and v.overlap == 1.0
    with pytest.raises(ValueError):
        coverage_overlap("apple", [], CORPUS, 0, 1)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.sampled_from(["apple", "boat", "fruit", "sail", "red"]), max_size=4), st.integers(1, 4))
def test_coverage_monotone_in_N(aspects, N):
    big = coverage_overlap("apple fruit", aspects, CORPUS, 1, N + 1).overlap
    small = coverage_overlap("apple fruit", aspects, CORPUS, 1, N).overlap
    assert small <= big


def test_pair_f_examples():
    r = pair_scores([["a", "b"], ["c"]], [["a", "b", "c"]])
    assert (r.precision, r.recall, r.f) == pytest.approx((1.0, 1 / 3, 0.5))
    assert pair_f_measure([["a", "b"], ["c"]], [["a", "b"], ["c"]]) == 1.0
    assert pair_f_measure([["a"], ["b"], ["c"]], [["a", "b", "c"]]) == 0.0
    assert pair_f_measure([["a"], ["b"]], [["a"], ["b"]]) == 1.0
    with pytest.raises(ValueError):
        pair_f_measure([["a"]], [["b"]])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=1, max_size=8), st.lists(st.integers(0, 3), min_size=8, max_size=8),
       st.permutations(range(4)))
def test_f_invariant_under_relabeling(pred_ids, gold_ids, perm):
    items = [f"x{i}" for i in range(len(pred_ids))]

    def part(ids):
        out = {}
        for a, i in zip(items, ids):
            out.setdefault(i, []).append(a)
        return list(out.values())

    gold = part(gold_ids[: len(items)])
    assert pair_f_measure(part(pred_ids), gold) == pair_f_measure(part([perm[i] for i in pred_ids]), gold)


def test_sigma_sweep_and_gold_io(tmp_path):
    names = ("a", "b", "c")
    mat = SimilarityMatrix(names, np.array([[1, 0.5, 0.1], [0.5, 1, 0.1], [0.1, 0.1, 1]]))
    gold = GoldClustering("q", (("a", "b"), ("c",)))
    rows = sigma_sweep([(mat, {}, gold)], [0.3, 1.0])
    assert rows == [(0.3, 1.0), (1.0, 0.0)]
    write_gold([gold], tmp_path / "g.jsonl")
    assert read_gold(tmp_path / "g.jsonl") == [gold]
    with pytest.raises(ValueError):
        GoldClustering("q", (("a",), ("a",)))
    with pytest.raises(ValueError):
        sigma_sweep([], [])


def test_parse_sigmas():
    assert parse_sigmas("0.05:0.55:0.05") == [round(0.05 * i, 10) for i in range(1, 12)]
    assert parse_sigmas("0.2,0.3") == [0.2, 0.3]
    with pytest.raises(ValueError):
        parse_sigmas("0:1:0")


def test_csv_six_decimals():
    assert format_csv(["s", "f"], [[0.35, 1.0], ["x", 2]]) == "s,f\n0.350000,1.000000\nx,2\n"
