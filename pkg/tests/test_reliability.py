import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from crcsearch.dyngraph import DynamicNetwork, QueryParams
from crcsearch.errors import UndefinedContextError
from crcsearch.oracle import brute_force_query
from crcsearch.reliability import (
    Community,
    ReliabilityContext,
    is_better,
    is_crc,
    longest_run_at_least,
    max_kcore_size,
    prunable,
    score,
    ubr_edge_set,
    ubr_interval,
)

from strategies import networks


def ctx(v=10, n=3, a=1.0):
    return ReliabilityContext(v, n, a)


@pytest.mark.parametrize(
    "size,dur,v,n,alpha,expected",
    [
        (5, 2, 10, 3, 1.0, 0.57),
        (5, 2, 10, 3, 2.0, 0.63),
        (4, 3, 10, 3, 1.0, 0.57),
        (4, 3, 10, 3, 2.0, 0.77),
    ],
)
def test_reported_scores(size, dur, v, n, alpha, expected):
    # exact rational distance: 0.625 sits on the inclusive 0.005 boundary of 0.63
    got = Fraction(score(size, dur, ctx(v, n, alpha)))
    assert abs(got - Fraction(str(expected))) <= Fraction(5, 1000)


def test_zero_size_or_duration():
    assert score(0, 2, ctx()) == 0.0
    assert score(3, 0, ctx()) == 0.0


def test_undefined_context():
    with pytest.raises(UndefinedContextError):
        score(1, 1, ReliabilityContext(0, 3))


@given(st.integers(1, 20), st.integers(1, 10), st.sampled_from([0.5, 1.0, 2.0, 4.0]))
def test_strictly_increasing(size, dur, alpha):
    c = ReliabilityContext(20, 10, alpha)
    if size < 20:
        assert score(size + 1, dur, c) > score(size, dur, c)
    if dur < 10:
        assert score(size, dur + 1, c) > score(size, dur, c)


def test_alpha_zero_is_size_only():
    c = ReliabilityContext(10, 4, 0.0)
    assert score(6, 1, c) == pytest.approx(0.6)
    assert score(6, 4, c) == pytest.approx(0.6)


def test_max_kcore_size_on_toy(toy):
    assert max_kcore_size(toy, 2, (0, 2)) == 10
    assert max_kcore_size(toy, 2, (1, 1)) == 10
    assert max_kcore_size(toy, 6, (0, 2)) == 0


def test_edge_set_bound():
    c = ReliabilityContext(10, 4)
    assert ubr_edge_set(6, 3, 1, c) == pytest.approx(score(4, 1, c))
    assert ubr_edge_set(10_000, 2, 2, c) == pytest.approx(score(10, 2, c))
    assert ubr_edge_set(0, 2, 2, c) == 0.0


def test_run_lengths():
    sizes = [3, 3, 4, 5, 4]
    assert [longest_run_at_least(sizes, n) for n in range(5)] == [5, 5, 3, 1, 3]


def test_interval_bound_small_cases():
    c = ReliabilityContext(10, 5)
    assert ubr_interval([3], 1, c) == pytest.approx(score(3, 1, c))
    assert ubr_interval([4, 4, 4], 1, c) == pytest.approx(score(4, 3, c))
    assert ubr_interval([], 1, c) == 0.0
    assert ubr_interval([0, 0], 1, c) == 0.0


def test_interval_bound_worked_sizes():
    # harmonic form gives 0.48 (size 4 over a run of 3); the arithmetic mean
    # variant would give 0.5, which we deliberately do not reproduce
    c = ReliabilityContext(10, 5)
    assert ubr_interval([3, 3, 4, 5, 4], 1, c) == pytest.approx(0.48)


def _nested_cliques_network():
    """q=0 sits in cliques of sizes 3,3,4,5,4; a 10-cycle elsewhere fixes v_k_max."""
    def clique(n):
        return [(u, v, 1.0) for u in range(n) for v in range(u + 1, n)]

    ring = [(5 + i, 5 + (i + 1) % 10, 1.0) for i in range(10)]
    return DynamicNetwork.from_edge_lists([clique(s) + ring for s in (3, 3, 4, 5, 4)], 15)


def test_interval_bound_dominates_optimum():
    net = _nested_cliques_network()
    best = brute_force_query(net, QueryParams(0, 2, 0.5, (0, 4))).best_score
    bound = ubr_interval([3, 3, 4, 5, 4], 1, ReliabilityContext(10, 5))
    assert best <= bound + 1e-12
    assert best == pytest.approx(0.48)


@given(networks(max_vertices=8, max_snapshots=4), st.integers(1, 3), st.sampled_from([0.0, 0.3, 0.6]))
def test_edge_set_bound_sound(net, k, theta):
    w = (0, net.num_snapshots - 1)
    v = max_kcore_size(net, k, w)
    if v == 0:
        return
    c = ReliabilityContext(v, net.num_snapshots)
    res = brute_force_query(net, QueryParams(0, k, theta, w))
    for (a, b), verts, edges, s in res.all_candidates:
        pool = [e for e in net[b].edge_set(theta)
                if all((x := net[t].weight(*e)) is not None and x >= theta for t in range(a, b + 1))]
        assert s <= ubr_edge_set(len(pool), k, b - a + 1, c) + 1e-12


@given(networks(max_vertices=8, max_snapshots=4), st.integers(1, 3), st.sampled_from([0.0, 0.3, 0.6]))
def test_interval_bound_sound(net, k, theta):
    w = (0, net.num_snapshots - 1)
    res = brute_force_query(net, QueryParams(0, k, theta, w))
    if not res.all_candidates:
        return
    c = ReliabilityContext(max_kcore_size(net, k, w), net.num_snapshots)
    by_iv = {iv: len(verts) for iv, verts, _, _ in res.all_candidates}
    for d in range(1, net.num_snapshots + 1):
        sizes = [by_iv.get((t - d + 1, t), 0) for t in range(d - 1, net.num_snapshots)]
        bound = ubr_interval(sizes, d, c)
        for (a, b), verts, _, s in res.all_candidates:
            if b - a + 1 >= d:
                assert s <= bound + 1e-12


@given(networks(max_vertices=8, max_snapshots=4), st.integers(1, 2))
def test_large_alpha_orders_by_duration(net, k):
    w = (0, net.num_snapshots - 1)
    res = brute_force_query(net, QueryParams(0, k, 0.0, w, alpha=1e6))
    if not res.all_candidates:
        return
    top = max(res.all_candidates, key=lambda c: (c[0][1] - c[0][0], len(c[1])))
    best = res.best_community
    assert (best.duration, best.size) == (top[0][1] - top[0][0] + 1, len(top[1]))


def comm(verts, iv, s):
    return Community(frozenset(verts), frozenset(), iv, s)


def test_tie_break_order():
    base = comm({0, 1, 2}, (0, 1), 0.5)
    assert is_better(base, None)
    assert is_better(comm({0}, (0, 0), 0.6), base)
    assert not is_better(comm({0, 1, 2, 3}, (0, 3), 0.4), base)
    # equal scores: longer, then earlier, then smaller, then lexicographic
    assert is_better(comm({0, 1, 2}, (0, 2), 0.5 + 1e-12), base)
    assert is_better(comm({0, 1, 2}, (1, 2), 0.5), comm({0, 1, 2}, (2, 3), 0.5))
    assert is_better(comm({0, 1}, (0, 1), 0.5), base)
    assert is_better(comm({0, 1, 2}, (0, 1), 0.5), comm({0, 1, 3}, (0, 1), 0.5))
    assert not is_better(base, base)


def test_prunable_keeps_ties():
    inc = comm({0, 1, 2}, (0, 1), 0.5)
    assert not prunable(0.5, None)
    assert not prunable(0.5, inc)
    assert not prunable(0.5 - 1e-12, inc)
    assert prunable(0.49, inc)


def test_is_crc(toy):
    clique = {(0, 2), (0, 3), (0, 4), (2, 3), (2, 4), (3, 4)}
    assert is_crc(toy, clique, (0, 1), 0.4, 3, 0)
    assert not is_crc(toy, clique, (0, 2), 0.4, 3, 0)  # (v3,v4) drops to 0.3
    assert not is_crc(toy, clique, (0, 1), 0.4, 3, 1)
    assert not is_crc(toy, clique | {(7, 8)}, (0, 0), 0.4, 1, 0)  # disconnected
    assert not is_crc(toy, clique - {(3, 4)}, (0, 0), 0.4, 3, 0)


def test_community_dict_uses_labels(toy):
    c = Community(frozenset({0, 2}), frozenset({(0, 2)}), (1, 2), 0.25)
    d = c.to_dict(toy.labels)
    assert d["vertices"] == ["v0", "v2"] and d["edges"] == [["v0", "v2"]]
    assert d["duration"] == 2 and not math.isnan(d["score"])
