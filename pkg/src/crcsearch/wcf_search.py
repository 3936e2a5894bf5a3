"""Index-based search by dynamic programming over community durations.

C(1,t) comes straight from the index.  A community lasting d snapshots and
ending at t must use only edges present in both C(d-1,t-1) and C(d-1,t), so
each layer is the q-component k-core of the edge intersection of two entries
of the previous layer.  Snapshots where C(1,t) is missing cut the window into
independent intervals.
"""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from typing import Iterator, Sequence

from .coredec import LocalCore, extract_local_core
from .dyngraph import DynamicNetwork, QueryParams
from .eef_search import SearchStats
from .reliability import (
    Community,
    ReliabilityContext,
    is_better,
    prunable,
    score,
    ubr_interval,
)
from .wcf_index import WcfIndex, query_c1

log = logging.getLogger(__name__)

C1Table = dict[int, "LocalCore | None"]


@dataclass
class DpLayer:
    d: int
    entries: dict[int, LocalCore | None]

    def sizes(self, ts: int, te: int) -> list[int]:
        return [len(self.entries[t][0]) if self.entries.get(t) else 0 for t in range(ts + self.d - 1, te + 1)]


@dataclass
class IntervalPlan:
    intervals: list[tuple[int, int]]
    bounds: list[float]
    anchors: list[int]

    @classmethod
    def from_c1(cls, c1: C1Table, window: tuple[int, int], ctx: ReliabilityContext) -> IntervalPlan:
        intervals, anchors = [], []
        start = None
        for t in range(window[0], window[1] + 1):
            if c1.get(t) is None:
                anchors.append(t)
                if start is not None:
                    intervals.append((start, t - 1))
                    start = None
            elif start is None:
                start = t
        if start is not None:
            intervals.append((start, window[1]))
        bounds = [ubr_interval([len(c1[t][0]) for t in range(a, b + 1)], 1, ctx) for a, b in intervals]
        return cls(intervals, bounds, anchors)

    def ordered(self) -> list[tuple[tuple[int, int], float]]:
        pairs = list(zip(self.intervals, self.bounds))
        return sorted(pairs, key=lambda p: (-p[1], p[0][0]))


def fetch_c1(net: DynamicNetwork, idx: WcfIndex, params: QueryParams) -> C1Table:
    ti, tj = params.window
    return {t: query_c1(idx, net[t], params.k, params.theta, t, params.q) for t in range(ti, tj + 1)}


def _next_layer(prev: DpLayer, ts: int, te: int, k: int, q: int, stats: SearchStats | None) -> DpLayer:
    d = prev.d + 1
    entries: dict[int, LocalCore | None] = {}
    for t in range(ts + d - 1, te + 1):
        a, b = prev.entries.get(t - 1), prev.entries.get(t)
        if a is None or b is None:
            entries[t] = None
            continue
        if stats is not None:
            stats.extractions += 1
        entries[t] = extract_local_core(a[1] & b[1], k, q)
    return DpLayer(d, entries)


def iter_layers(net: DynamicNetwork, idx: WcfIndex, params: QueryParams,
                c1: C1Table | None = None) -> Iterator[tuple[tuple[int, int], DpLayer]]:
    """Every DP layer of every interval, without pruning (for inspection)."""
    c1 = c1 if c1 is not None else fetch_c1(net, idx, params)
    ctx = ReliabilityContext(1, params.window_len, params.alpha)
    for ts, te in IntervalPlan.from_c1(c1, params.window, ctx).intervals:
        layer = DpLayer(1, {t: c1[t] for t in range(ts, te + 1)})
        yield (ts, te), layer
        while layer.d < te - ts + 1:
            layer = _next_layer(layer, ts, te, params.k, params.q, None)
            if not any(layer.entries.values()):
                break
            yield (ts, te), layer


def wcf_query(
    net: DynamicNetwork,
    idx: WcfIndex,
    params: QueryParams,
    *,
    prune: bool = True,
    stats: SearchStats | None = None,
    c1: C1Table | None = None,
) -> Community | None:
    idx.check_matches(net)
    params.validate(net)
    stats = stats if stats is not None else SearchStats()
    k, q = params.k, params.q
    ti, tj = params.window
    v_k_max = max(idx.max_component_size(k, t) for t in range(ti, tj + 1))
    if v_k_max == 0:
        return None
    ctx = ReliabilityContext(v_k_max, params.window_len, params.alpha)
    if c1 is None:
        c1 = fetch_c1(net, idx, params)
    plan = IntervalPlan.from_c1(c1, params.window, ctx)

    best: Community | None = None
    for (ts, te), bound in plan.ordered():
        if prune and prunable(bound, best):
            stats.pruned_intervals += 1
            continue
        layer = DpLayer(1, {t: c1[t] for t in range(ts, te + 1)})
        while True:
            d = layer.d
            for t, entry in layer.entries.items():
                if entry is None:
                    continue
                cand = Community(entry[0], entry[1], (t - d + 1, t), score(len(entry[0]), d, ctx))
                if is_better(cand, best):
                    best = cand
            if d == te - ts + 1:
                break
            if prune and prunable(ubr_interval(layer.sizes(ts, te), d, ctx), best):
                stats.pruned_by_bound += 1
                break
            layer = _next_layer(layer, ts, te, k, q, stats)
            if not any(layer.entries.values()):
                break
    log.debug("wcf_query %s -> %s (%s)", params, best, stats)
    return best


def alpha_sweep(
    net: DynamicNetwork,
    idx: WcfIndex,
    params: QueryParams,
    alphas: Sequence[float],
    *,
    prune: bool = True,
) -> list[tuple[float, Community | None]]:
    """Best community for each alpha; single-snapshot lookups are shared."""
    params.validate(net)
    c1 = fetch_c1(net, idx, params)
    return [
        (a, wcf_query(net, idx, dataclasses.replace(params, alpha=a), prune=prune, c1=c1))
        for a in alphas
    ]
