"""Brute-force reference implementations for cross-checking at desk scale.

Nothing here calls the optimized modules' algorithms: cores come from
repeated whole-graph removal, components from a plain DFS, and every
interval of the window is tried.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .dyngraph import DynamicNetwork, GraphInstance, QueryParams
from .errors import InvariantViolation, OracleRefusal
from .reliability import Community

MAX_VERTICES = 15
MAX_SNAPSHOTS = 5
TOL = 1e-9


@dataclass
class OracleResult:
    best_score: float
    best_community: Community | None
    all_candidates: list[tuple[tuple[int, int], frozenset, frozenset, float]] = field(default_factory=list)


def _adj(edges: Iterable[tuple[int, int]]) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = {}
    for u, v in edges:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    return adj


def _naive_kcore(adj: dict[int, set[int]], k: int) -> set[int]:
    alive = set(adj)
    changed = True
    while changed:
        changed = False
        for v in list(alive):
            if len(adj[v] & alive) < k:
                alive.remove(v)
                changed = True
    return alive


def _reach(adj: dict[int, set[int]], start: int, within: set[int]) -> set[int]:
    if start not in within:
        return set()
    out, stack = {start}, [start]
    while stack:
        v = stack.pop()
        for u in adj.get(v, ()):
            if u in within and u not in out:
                out.add(u)
                stack.append(u)
    return out


def naive_core_numbers(g: GraphInstance | dict) -> dict[int, int]:
    adj = g.adjacency() if isinstance(g, GraphInstance) else {v: set(n) for v, n in g.items()}
    core = {v: 0 for v in adj}
    k = 1
    while True:
        members = _naive_kcore(adj, k)
        if not members:
            return core
        for v in members:
            core[v] = k
        k += 1


def naive_theta_k_core(g: GraphInstance, theta: float, k: int, q: int):
    adj = _adj((u, v) for u, v, w in g.edges() if w >= theta)
    comp = _reach(adj, q, _naive_kcore(adj, k))
    if not comp:
        return None
    edges = frozenset((u, v) for u, v, w in g.edges() if w >= theta and u in comp and v in comp)
    return frozenset(comp), edges


def naive_thresholds(g: GraphInstance, k: int, grid: Sequence[float]) -> dict[int, int]:
    """Highest grid level at which each vertex still sits in a k-core."""
    out: dict[int, int] = {}
    for i, th in enumerate(grid):
        adj = _adj((u, v) for u, v, w in g.edges() if w >= th)
        for v in _naive_kcore(adj, k):
            out[v] = i
    return out


def naive_subcore(g: GraphInstance, u: int) -> set[int]:
    core = naive_core_numbers(g)
    cu = core.get(u, 0)
    same = {v for v, c in core.items() if c == cu} | {u}
    return _reach(g.adjacency(), u, same) or {u}


def naive_purecore(g: GraphInstance, u: int) -> set[int]:
    core = naive_core_numbers(g)
    adj = g.adjacency()
    cu = core.get(u, 0)
    ok = {
        w for w, c in core.items()
        if c == cu and sum(1 for x in adj[w] if core[x] >= c) > cu
    }
    return _reach(adj, u, ok)


def _score(size: int, duration: int, v_k_max: int, window_len: int, alpha: float) -> float:
    nv, nt = size / v_k_max, duration / window_len
    a2 = alpha * alpha
    return (1 + a2) * nv * nt / (a2 * nv + nt)


def _prefer(a, b) -> bool:
    """Declared ordering over (score, interval, vertices) triples."""
    if b is None or a[0] > b[0] + TOL:
        return True
    if a[0] < b[0] - TOL:
        return False
    (sa, ea), (sb, eb) = a[1], b[1]
    if ea - sa != eb - sb:
        return ea - sa > eb - sb
    if sa != sb:
        return sa < sb
    if len(a[2]) != len(b[2]):
        return len(a[2]) < len(b[2])
    return sorted(a[2]) < sorted(b[2])


def _is_crc(edges, net: DynamicNetwork, interval, theta: float, k: int, q: int) -> bool:
    adj = _adj(edges)
    if q not in adj or any(len(n) < k for n in adj.values()):
        return False
    if _reach(adj, q, set(adj)) != set(adj):
        return False
    return all(
        (w := net[t].weight(u, v)) is not None and w >= theta
        for t in range(interval[0], interval[1] + 1)
        for u, v in edges
    )


def _check_maximal(net, interval, pool, best_edges, best_verts, params, rng) -> None:
    pool = sorted(pool)
    if len(pool) <= 12:
        subsets = (
            [e for e, bit in zip(pool, bits) if bit]
            for bits in itertools.product((0, 1), repeat=len(pool))
        )
    else:
        subsets = ([e for e in pool if rng.random() < 0.5] for _ in range(1000))
    for sub in subsets:
        if sub and _is_crc(sub, net, interval, params.theta, params.k, params.q):
            verts = {x for e in sub for x in e}
            if not (set(sub) <= best_edges and verts <= best_verts):
                raise InvariantViolation(f"edge subset {sub} is a CRC outside the maximal one over {interval}")


def brute_force_query(
    net: DynamicNetwork,
    params: QueryParams,
    *,
    check_maximality: bool = False,
    seed: int = 0,
) -> OracleResult:
    if net.vertex_count > MAX_VERTICES or net.num_snapshots > MAX_SNAPSHOTS:
        raise OracleRefusal(
            f"oracle limited to |V|<={MAX_VERTICES}, |T|<={MAX_SNAPSHOTS}; "
            f"got {net.vertex_count}, {net.num_snapshots}"
        )
    params.validate(net)
    q, k, theta = params.q, params.k, params.theta
    ti, tj = params.window
    window_len = tj - ti + 1

    v_k_max = 0
    for t in range(ti, tj + 1):
        adj = _adj((u, v) for u, v, _ in net[t].edges())
        core = _naive_kcore(adj, k)
        while core:
            comp = _reach(adj, next(iter(core)), core)
            v_k_max = max(v_k_max, len(comp))
            core -= comp
    result = OracleResult(0.0, None)
    if v_k_max == 0:
        return result

    rng = random.Random(seed)
    best = None
    for a in range(ti, tj + 1):
        for b in range(a, tj + 1):
            pool = {
                (u, v) for u, v, w in net[a].edges()
                if w >= theta and all(
                    (x := net[t].weight(u, v)) is not None and x >= theta for t in range(a, b + 1)
                )
            }
            adj = _adj(pool)
            comp = _reach(adj, q, _naive_kcore(adj, k))
            if not comp:
                continue
            edges = frozenset(e for e in pool if e[0] in comp and e[1] in comp)
            s = _score(len(comp), b - a + 1, v_k_max, window_len, params.alpha)
            if check_maximality:
                _check_maximal(net, (a, b), pool, edges, comp, params, rng)
            result.all_candidates.append(((a, b), frozenset(comp), edges, s))
            cand = (s, (a, b), frozenset(comp), edges)
            if _prefer(cand, best):
                best = cand
    if best is not None:
        result.best_score = best[0]
        result.best_community = Community(best[2], best[3], best[1], best[0])
    return result
