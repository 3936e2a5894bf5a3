import pytest
from hypothesis import given
from hypothesis import strategies as st

from crcsearch.coredec import theta_k_core
from crcsearch.dyngraph import DynamicNetwork, QueryParams
from crcsearch.eef_search import SearchStats, eef_query
from crcsearch.errors import ConfigurationError
from crcsearch.oracle import brute_force_query
from crcsearch.reliability import ReliabilityContext
from crcsearch.wcf_index import build
from crcsearch.wcf_search import IntervalPlan, alpha_sweep, fetch_c1, iter_layers, wcf_query

from strategies import networks


def test_worked_query(toy, toy_index):
    best = wcf_query(toy, toy_index, QueryParams(0, 3, 0.4, (0, 2)))
    assert best.vertices == {0, 2, 3, 4} and best.interval == (0, 1)
    assert best.score == pytest.approx(4 / 7)


@pytest.mark.parametrize("k,theta", [(1, 0.0), (2, 0.5), (2, 0.3), (3, 0.4), (1, 0.8)])
@pytest.mark.parametrize("q", range(10))
def test_same_answer_as_online_search(toy, toy_index, k, theta, q):
    params = QueryParams(q, k, theta, (0, 2))
    assert wcf_query(toy, toy_index, params) == eef_query(toy, params)


def test_all_anchored(toy, toy_index):
    assert wcf_query(toy, toy_index, QueryParams(0, 2, 0.95, (0, 2))) is None


def test_mismatched_index(toy, toy_index):
    short = DynamicNetwork(toy.snapshots[:2], 10)
    with pytest.raises(ConfigurationError):
        wcf_query(short, toy_index, QueryParams(0, 2, 0.5, (0, 1)))


def test_interval_plan_splits_at_anchors():
    c1 = {0: ({0}, set()), 1: None, 2: ({0, 1}, set()), 3: ({0, 1}, set()), 4: None}
    plan = IntervalPlan.from_c1(c1, (0, 4), ReliabilityContext(4, 5))
    assert plan.intervals == [(0, 0), (2, 3)]
    assert plan.anchors == [1, 4]
    assert [iv for iv, _ in plan.ordered()] == [(2, 3), (0, 0)]


@given(networks(max_vertices=10), st.integers(1, 3), st.sampled_from([0.0, 0.3, 0.6]), st.integers(0, 9))
def test_anchor_iff_no_local_core(net, k, theta, q):
    q %= net.vertex_count
    params = QueryParams(q, k, theta, (0, net.num_snapshots - 1))
    c1 = fetch_c1(net, build(net), params)
    for t, entry in c1.items():
        assert entry == theta_k_core(net[t], theta, k, q)


@given(networks(max_vertices=10), st.integers(1, 3), st.sampled_from([0.0, 0.3, 0.6]), st.integers(0, 9))
def test_layers_equal_maximal_crc_per_interval(net, k, theta, q):
    q %= net.vertex_count
    params = QueryParams(q, k, theta, (0, net.num_snapshots - 1))
    ref = {iv: (v, e) for iv, v, e, _ in brute_force_query(net, params).all_candidates}
    seen = set()
    for (ts, te), layer in iter_layers(net, build(net), params):
        for t, entry in layer.entries.items():
            iv = (t - layer.d + 1, t)
            assert entry == ref.get(iv)
            seen.add(iv)
    # every interval the oracle found lies inside one anchor-free stretch
    assert set(ref) <= seen


@given(networks(max_vertices=10), st.integers(1, 3), st.sampled_from([0.0, 0.3]))
def test_layer_containment(net, k, theta):
    params = QueryParams(0, k, theta, (0, net.num_snapshots - 1))
    prev = None
    for iv, layer in iter_layers(net, build(net), params):
        if prev is not None and prev[0] == iv and layer.d == prev[1].d + 1:
            for t, entry in layer.entries.items():
                if entry is not None:
                    assert entry[1] <= prev[1].entries[t - 1][1] & prev[1].entries[t][1]
                    assert 0 in entry[0]
        prev = (iv, layer)


@given(networks(max_vertices=10), st.integers(1, 3), st.sampled_from([0.0, 0.3, 0.6]),
       st.sampled_from([0.0, 1.0, 2.0]), st.integers(0, 9))
def test_matches_oracle(net, k, theta, alpha, q):
    q %= net.vertex_count
    params = QueryParams(q, k, theta, (0, net.num_snapshots - 1), alpha)
    ref = brute_force_query(net, params).best_community
    got = wcf_query(net, build(net), params)
    assert got == ref or (got is not None and ref is not None and got.score == ref.score
                          and (got.vertices, got.interval) == (ref.vertices, ref.interval))
    assert (got is None) == (ref is None)


@given(networks(max_vertices=10), st.integers(1, 3), st.sampled_from([0.0, 0.3, 0.6]))
def test_pruning_soundness(net, k, theta):
    idx = build(net)
    params = QueryParams(0, k, theta, (0, net.num_snapshots - 1))
    on, off = SearchStats(), SearchStats()
    a = wcf_query(net, idx, params, stats=on)
    b = wcf_query(net, idx, params, prune=False, stats=off)
    assert a == b
    assert on.extractions <= off.extractions


def trade_off_network():
    """K6 at t0, K4 through t1, a triangle through t3: bigger means shorter."""
    def clique(n):
        return [(u, v, 1.0) for u in range(n) for v in range(u + 1, n)]

    return DynamicNetwork.from_edge_lists([clique(6), clique(4), clique(3), clique(3)], 6)


def test_alpha_sweep_trade_off():
    net = trade_off_network()
    params = QueryParams(0, 2, 0.5, (0, 3))
    sweep = alpha_sweep(net, build(net), params, [0, 0.5, 1, 2, 4, 6])
    durations = [c.duration for _, c in sweep]
    assert durations == sorted(durations)
    assert sweep[0][1].size == 6  # alpha 0 ranks by size alone
    assert sweep[-1][1].duration == 4
    for a, c in sweep:
        assert c == brute_force_query(net, QueryParams(0, 2, 0.5, (0, 3), a)).best_community


def test_alpha_sweep_single_candidate():
    tri = [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]
    net = DynamicNetwork.from_edge_lists([tri, tri], 3)
    sweep = alpha_sweep(net, build(net), QueryParams(0, 2, 0.5, (0, 1)), [0, 1, 5])
    assert len({(c.vertices, c.interval) for _, c in sweep}) == 1
