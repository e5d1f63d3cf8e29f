import math

import pytest
from hypothesis import given, settings, strategies as st

from aspector.candidates import SegmentedQuery
from aspector.kb import build_kb
from aspector.propagation import (
    AVERAGE, INDICATOR, ClassAspectDistribution, build_graph, class_aspects, class_node_label, propagate,
    read_class_distributions, run_passes, smooth, write_class_distributions,
)

KB = build_kb([("laos", "Country"), ("vietnam", "Country"), ("kobe bryant", "NBA Player")])
LAOS, VIETNAM = SegmentedQuery.of("laos", "travel"), SegmentedQuery.of("vietnam", "travel")


def test_graph_shape():
    g = build_graph(KB, [LAOS, VIETNAM, SegmentedQuery.of("atlantis", "travel")])
    assert g.class_nodes == {("Country", "travel")}
    assert g.class_members[("Country", "travel")] == (LAOS, VIETNAM)
    assert [q.entity for q in g.excluded] == ["atlantis"]
    assert class_node_label(("Country", "travel")) == "Country|travel"
    assert g.weight(LAOS, ("Country", "travel")) == 1.0
    assert g.weight(("Country", "travel"), LAOS) == 0.1
    assert build_graph(KB, [LAOS], 0).weight(("Country", "travel"), LAOS) == 0.0
    with pytest.raises(ValueError):
        build_graph(KB, [LAOS], -1)


def test_class_weights_hand_computed():
    g = build_graph(KB, [LAOS, VIETNAM])
    dists = {VIETNAM: {"<E> visa": 0.5, "<E> guide": 0.5}}
    avg = class_aspects(g, dists, AVERAGE)[0].weights
    ind = class_aspects(g, dists, INDICATOR)[0].weights
    assert avg["<E> visa"] == 0.25
    assert ind["<E> visa"] == 0.5


def test_smooth_hand_computed():
    p = smooth({}, {"<E> visa": 0.25}, 0.1)
    assert p["<E> visa"] == pytest.approx(0.025 / 1.1, abs=1e-15)
    assert smooth({"a": 0.3, "b": 0.7}, {"c": 1.0}, 0.0) == {"a": 0.3, "b": 0.7}
    with pytest.raises(ValueError):
        smooth({}, {}, -0.1)


def test_rare_instance_proportional_to_class():
    g = build_graph(KB, [LAOS, VIETNAM])
    dists = {VIETNAM: {"<E> visa": 0.75, "<E> guide": 0.25}}
    out = propagate(g, dists, AVERAGE, 0.1)[LAOS]
    assert out["<E> visa"] / out["<E> guide"] == pytest.approx(3.0)


def test_single_member_fixed_point():
    g = build_graph(KB, [SegmentedQuery.of("kobe bryant")])
    d = {SegmentedQuery.of("kobe bryant"): {"<E> injury": 0.6, "<E> salary": 0.4}}
    out = propagate(g, d, AVERAGE, 0.1)[SegmentedQuery.of("kobe bryant")]
    assert out == pytest.approx(d[SegmentedQuery.of("kobe bryant")], abs=1e-15)


def test_indicator_is_renormalized_for_mixing():
    c = ClassAspectDistribution(("C", None), {"a": 1.0, "b": 0.5}, INDICATOR)
    assert c.mixing_weights() == pytest.approx({"a": 2 / 3, "b": 1 / 3})
    assert ClassAspectDistribution(("C", None), {"a": 1.0}, AVERAGE).mixing_weights() == {"a": 1.0}


def test_unknown_variant():
    with pytest.raises(ValueError):
        class_aspects(build_graph(KB, [LAOS]), {}, "median")


def test_class_file_round_trip(tmp_path):
    g = build_graph(KB, [LAOS, VIETNAM])
    dists = class_aspects(g, {VIETNAM: {"<E> visa": 0.5, "cambodia travel": 0.5}}, INDICATOR)
    write_class_distributions(dists, tmp_path / "c.tsv")
    back = read_class_distributions(tmp_path / "c.tsv")
    assert [(d.class_node, d.weights) for d in back] == [(d.class_node, d.weights) for d in dists]


patterns = st.sampled_from(["<E> visa", "<E> guide", "<E> hotels", "cambodia travel"])
dist = st.dictionaries(patterns, st.floats(0.01, 1.0), max_size=4).map(
    lambda d: {k: v / math.fsum(d.values()) for k, v in d.items()} if d else {}
)


@settings(max_examples=150, deadline=None)
@given(dist, dist, st.sampled_from([AVERAGE, INDICATOR]), st.floats(0.0, 50.0))
def test_convexity_and_mass(d1, d2, variant, K):
    g = build_graph(KB, [LAOS, VIETNAM], K)
    state, classes = run_passes(g, {LAOS: d1, VIETNAM: d2}, variant, K)
    pc = classes[("Country", "travel")].mixing_weights()
    for q, seed in ((LAOS, d1), (VIETNAM, d2)):
        for pat in set(seed) | set(pc):
            a, b = seed.get(pat, 0.0), pc.get(pat, 0.0)
            assert min(a, b) - 1e-12 <= state[q].get(pat, 0.0) <= max(a, b) + 1e-12
        assert math.fsum(state[q].values()) <= 1.0 + 1e-9


@settings(max_examples=100, deadline=None)
@given(dist, dist, st.floats(0.0, 10.0), st.floats(0.0, 10.0))
def test_larger_K_moves_toward_class(d1, d2, k1, k2):
    lo, hi = sorted((k1, k2))
    g = build_graph(KB, [LAOS, VIETNAM])
    s_lo, classes = run_passes(g, {LAOS: d1, VIETNAM: d2}, AVERAGE, lo)
    s_hi, _ = run_passes(g, {LAOS: d1, VIETNAM: d2}, AVERAGE, hi)
    pc = classes[("Country", "travel")].weights
    for pat in set(d1) | set(pc):
        target = pc.get(pat, 0.0)
        assert abs(s_hi[LAOS].get(pat, 0.0) - target) <= abs(s_lo[LAOS].get(pat, 0.0) - target) + 1e-12


@settings(max_examples=100, deadline=None)
@given(dist, dist, st.sampled_from([AVERAGE, INDICATOR]))
def test_third_pass_is_stationary(d1, d2, variant):
    g = build_graph(KB, [LAOS, VIETNAM])
    _, c1 = run_passes(g, {LAOS: d1, VIETNAM: d2}, variant, passes=1)
    _, c3 = run_passes(g, {LAOS: d1, VIETNAM: d2}, variant, passes=3)
    for node in c1:
        w1, w3 = c1[node].weights, c3[node].weights
        assert all(abs(w1.get(p, 0.0) - w3.get(p, 0.0)) <= 1e-12 for p in set(w1) | set(w3))
