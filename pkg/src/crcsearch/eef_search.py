"""Online search by eligible-edge filtering.

Each snapshot of the query window is scanned once with a BFS from q that
keeps edges of weight >= theta and tracks, per edge, how many consecutive
snapshots (ending at the current one) it has stayed eligible.  Candidate
communities ending at t_n with duration d are then the local k-cores of the
edges eligible for at least d snapshots.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field

from .coredec import extract_local_core, max_component_kcore_size
from .dyngraph import DynamicNetwork, Edge, GraphInstance, QueryParams, edge_key
from .errors import InvariantViolation
from .reliability import (
    Community,
    ReliabilityContext,
    is_better,
    is_crc,
    max_kcore_size,
    prunable,
    score,
    ubr_edge_set,
)

log = logging.getLogger(__name__)


@dataclass
class EligibleEdgeState:
    lasting: dict[Edge, int] = field(default_factory=dict)

    @property
    def eligible_edges(self) -> set[Edge]:
        return set(self.lasting)


@dataclass
class SearchStats:
    extractions: int = 0
    pruned_by_density: int = 0
    pruned_by_bound: int = 0
    pruned_intervals: int = 0


def scan_snapshot(
    g: GraphInstance,
    params: QueryParams,
    prev: EligibleEdgeState,
    ctx: ReliabilityContext | None = None,
) -> tuple[EligibleEdgeState, float]:
    """BFS from q over edges with weight >= theta, skipping low-degree vertices.

    Returns the new lasting-time state and the duration-1 score bound.
    """
    q, k, theta = params.q, params.k, params.theta
    state = EligibleEdgeState()
    # degree test uses the unfiltered snapshot degree
    if q not in g or g.degree(q) < k:
        return state, 0.0
    seen = {q}
    queue = deque([q])
    while queue:
        v = queue.popleft()
        for u, w in g.neighbors(v).items():
            if w < theta or g.degree(u) < k:
                continue
            e = edge_key(u, v)
            if e not in state.lasting:
                state.lasting[e] = prev.lasting.get(e, 0) + 1
            if u not in seen:
                seen.add(u)
                queue.append(u)
    if ctx is None:
        ctx = ReliabilityContext(max(1, max_component_kcore_size(g, k)), params.window_len, params.alpha)
    return state, ubr_edge_set(len(state.lasting), k, 1, ctx)


def eef_query(
    net: DynamicNetwork,
    params: QueryParams,
    *,
    prune: bool = True,
    verify: bool = True,
    stats: SearchStats | None = None,
) -> Community | None:
    params.validate(net)
    stats = stats if stats is not None else SearchStats()
    q, k = params.q, params.k
    ti, tj = params.window
    v_k_max = max_kcore_size(net, k, params.window)
    if v_k_max == 0:
        return None
    ctx = ReliabilityContext(v_k_max, params.window_len, params.alpha)

    states: dict[int, EligibleEdgeState] = {}
    bounds: dict[int, float] = {}
    prev = EligibleEdgeState()
    for t in range(ti, tj + 1):
        prev, bounds[t] = scan_snapshot(net[t], params, prev, ctx)
        states[t] = prev

    min_edges = k * (k + 1) // 2
    best: Community | None = None
    for tn in sorted(bounds, key=lambda t: (-bounds[t], t)):
        lasting = states[tn].lasting
        for d in range(1, tn - ti + 2):
            eligible = [e for e, lam in lasting.items() if lam >= d]
            if not eligible:
                break
            if prune:
                if len(eligible) < min_edges:
                    stats.pruned_by_density += 1
                    break
                if prunable(ubr_edge_set(len(eligible), k, d, ctx), best):
                    stats.pruned_by_bound += 1
                    continue
            stats.extractions += 1
            found = extract_local_core(eligible, k, q)
            if found is None:
                # fewer edges for larger d cannot bring q back into a k-core
                break
            verts, edges = found
            interval = (tn - d + 1, tn)
            if verify and not is_crc(net, edges, interval, params.theta, k, q):
                raise InvariantViolation(f"extracted community over {interval} fails re-verification")
            cand = Community(verts, edges, interval, score(len(verts), d, ctx))
            if is_better(cand, best):
                best = cand
    log.debug("eef_query %s -> %s (%s)", params, best, stats)
    return best
