"""Incremental index maintenance for edge insertions, deletions and reweights.

Every update is treated as a weight change ``w_old -> w_new`` where either
side may be ``None`` (edge absent).  On each grid level where the edge's
presence flips, the filtered snapshot either gains or loses one edge, which
moves core numbers by at most one and only inside a small candidate set:

* gained edge, K = smaller endpoint core: vertices of core K reachable from an
  endpoint of core K through core-K vertices that keep more than K
  neighbours of core >= K (the purecore);
* lost edge: vertices of core K connected to an endpoint of core K through
  core-K vertices (the subcore).

The candidates are peeled locally; thresholds of vertices whose per-level
core profile moved are recomputed, and the affected forests are re-treed.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .coredec import core_decompose
from .dyngraph import DynamicNetwork, GraphInstance, edge_key
from .errors import DeltaError, ParseError
from .index_compress import expand
from .wcf_index import WcfIndex, forest_from_thresholds

log = logging.getLogger(__name__)

Neighbors = Callable[[int], Iterable[int]]
CoreOf = Callable[[int], int]


@dataclass(frozen=True)
class EdgeUpdate:
    op: str  # "insert" | "delete" | "reweight"
    u: int
    v: int
    w: float | None = None
    w_old: float | None = None

    @classmethod
    def insert(cls, u: int, v: int, w: float) -> EdgeUpdate:
        return cls("insert", u, v, w)

    @classmethod
    def delete(cls, u: int, v: int) -> EdgeUpdate:
        return cls("delete", u, v)

    @classmethod
    def reweight(cls, u: int, v: int, w_new: float, w_old: float | None = None) -> EdgeUpdate:
        return cls("reweight", u, v, w_new, w_old)


@dataclass
class GraphDelta:
    t: int
    updates: list[EdgeUpdate] = field(default_factory=list)


@dataclass
class MaintenanceReport:
    candidates: set[int] = field(default_factory=set)
    # (k, v) -> (old level, new level); None means not indexed at that k
    changed: dict[tuple[int, int], tuple[int | None, int | None]] = field(default_factory=dict)
    rebuilt_k: list[int] = field(default_factory=list)


# -- candidate sets -------------------------------------------------------

def _filtered(g: GraphInstance, theta: float) -> Neighbors:
    return lambda x: [y for y, w in g.neighbors(x).items() if w >= theta]


def _subcore(nbrs: Neighbors, core: CoreOf, roots: Iterable[int], K: int) -> set[int]:
    seen = {r for r in roots if core(r) == K}
    queue = deque(seen)
    while queue:
        x = queue.popleft()
        for y in nbrs(x):
            if y not in seen and core(y) == K:
                seen.add(y)
                queue.append(y)
    return seen


def _purecore(nbrs: Neighbors, core: CoreOf, roots: Iterable[int], K: int) -> set[int]:
    def qualified(x: int) -> bool:
        return core(x) == K and sum(1 for y in nbrs(x) if core(y) >= K) > K

    seen = {r for r in roots if qualified(r)}
    queue = deque(seen)
    while queue:
        x = queue.popleft()
        for y in nbrs(x):
            if y not in seen and qualified(y):
                seen.add(y)
                queue.append(y)
    return seen


def _peel_candidates(nbrs: Neighbors, core: CoreOf, cand: set[int], K: int, k: int) -> set[int]:
    """Candidates that keep >= k neighbours among surviving candidates and core > K vertices."""
    alive = set(cand)
    cnt = {x: sum(1 for y in nbrs(x) if y in alive or core(y) > K) for x in cand}
    queue = deque(x for x, c in cnt.items() if c < k)
    while queue:
        x = queue.popleft()
        if x not in alive:
            continue
        alive.discard(x)
        for y in nbrs(x):
            if y in alive:
                cnt[y] -= 1
                if cnt[y] < k:
                    queue.append(y)
    return alive


def _core_lookup(g: GraphInstance, theta: float, cores: Mapping[int, int] | None) -> CoreOf:
    if cores is None:
        cores = core_decompose(g.adjacency(theta))
    return lambda x: cores.get(x, 0)


def subcore(g: GraphInstance, u: int, theta: float = 0.0, cores: Mapping[int, int] | None = None) -> set[int]:
    """Vertices with u's core number joined to u through vertices of that core number."""
    core = _core_lookup(g, theta, cores)
    if u not in g:
        return {u}
    return _subcore(_filtered(g, theta), core, [u], core(u))


def purecore(g: GraphInstance, u: int, theta: float = 0.0, cores: Mapping[int, int] | None = None) -> set[int]:
    """Subcore restricted to vertices with more than core(u) neighbours of core >= their own.

    Empty when u itself does not have enough such neighbours.
    """
    core = _core_lookup(g, theta, cores)
    if u not in g:
        return set()
    return _purecore(_filtered(g, theta), core, [u], core(u))


def _gain_edge(g_new: GraphInstance, theta: float, core: CoreOf, u: int, v: int) -> tuple[set[int], set[int]]:
    K = min(core(u), core(v))
    nbrs = _filtered(g_new, theta)
    cand = _purecore(nbrs, core, (u, v), K)
    return cand, _peel_candidates(nbrs, core, cand, K, K + 1)


def _lose_edge(g_old: GraphInstance, g_new: GraphInstance, theta: float, core: CoreOf,
               u: int, v: int) -> tuple[set[int], set[int]]:
    K = min(core(u), core(v))
    cand = _subcore(_filtered(g_old, theta), core, (u, v), K)
    keep = _peel_candidates(_filtered(g_new, theta), core, cand, K, K)
    return cand, cand - keep


# -- delta application ----------------------------------------------------

def _resolve(g: GraphInstance, up: EdgeUpdate, entry: int) -> tuple[float | None, float | None]:
    if up.u == up.v:
        raise DeltaError(f"self-loop on vertex {up.u}", entry)
    cur = g.weight(up.u, up.v)
    if up.op == "insert":
        if cur is not None:
            raise DeltaError(f"edge ({up.u},{up.v}) already present", entry)
        new = up.w
    elif up.op == "delete":
        if cur is None:
            raise DeltaError(f"edge ({up.u},{up.v}) not present", entry)
        new = None
    elif up.op == "reweight":
        if cur is None:
            raise DeltaError(f"edge ({up.u},{up.v}) not present", entry)
        if up.w_old is not None and abs(up.w_old - cur) > 1e-12:
            raise DeltaError(f"edge ({up.u},{up.v}) has weight {cur}, not {up.w_old}", entry)
        new = up.w
    else:
        raise DeltaError(f"unknown update kind {up.op!r}", entry)
    if new is not None and not 0.0 < new <= 1.0:
        raise DeltaError(f"weight {new} outside (0,1]", entry)
    return cur, new


def _profiles(levels: dict[int, dict[int, int]], width: int) -> dict[int, list[int]]:
    """Per vertex, its core number in each grid-filtered snapshot."""
    prof: dict[int, list[int]] = {}
    for lv in levels.values():
        for v, top in lv.items():
            p = prof.setdefault(v, [0] * width)
            for i in range(top + 1):
                p[i] += 1
    return prof


def _levels_from_profile(p: list[int]) -> dict[int, int]:
    out = {}
    for i, c in enumerate(p):
        for k in range(1, c + 1):
            out[k] = i  # profile is non-increasing, so the last i wins
    return out


def apply_delta(
    idx: WcfIndex,
    net: DynamicNetwork,
    delta: GraphDelta,
    *,
    report: MaintenanceReport | None = None,
) -> tuple[WcfIndex, DynamicNetwork]:
    """Apply a batch of updates to one snapshot and patch its forests.

    Neither input is modified.  A compressed index is expanded first.
    """
    if idx.aux is not None:
        idx = expand(idx)
    idx.check_matches(net)
    t = delta.t
    if not 0 <= t < net.num_snapshots:
        raise DeltaError(f"snapshot {t} out of range")
    grid = idx.grid
    report = report if report is not None else MaintenanceReport()
    levels = idx.levels(t)
    prof = _profiles(levels, len(grid))
    touched: set[int] = set()
    rebuild_upto = 0
    g = net[t]

    def core_at(i: int) -> CoreOf:
        return lambda x: prof[x][i] if x in prof else 0

    for entry, up in enumerate(delta.updates, start=1):
        if not (0 <= up.u < net.vertex_count and 0 <= up.v < net.vertex_count):
            raise DeltaError(f"vertex outside the universe in ({up.u},{up.v})", entry)
        w_old, w_new = _resolve(g, up, entry)
        if w_old == w_new:
            continue
        u, v = edge_key(up.u, up.v)
        before = min(prof[u][0], prof[v][0]) if u in prof and v in prof else 0
        g_new = g.with_edge_weight(u, v, w_new)
        for i, th in enumerate(grid):
            had = w_old is not None and w_old >= th
            has = w_new is not None and w_new >= th
            if had == has:
                continue
            if has:
                cand, moved = _gain_edge(g_new, th, core_at(i), u, v)
                step = 1
            else:
                cand, moved = _lose_edge(g, g_new, th, core_at(i), u, v)
                step = -1
            report.candidates |= cand
            for x in moved:
                prof.setdefault(x, [0] * len(grid))[i] += step
            touched |= moved
        g = g_new
        after = min(prof[u][0], prof[v][0]) if u in prof and v in prof else 0
        rebuild_upto = max(rebuild_upto, before, after)

    rebuild = set(range(1, rebuild_upto + 1))
    for x in touched:
        new_lv = _levels_from_profile(prof[x])
        for k in set(new_lv) | {k for k, lv in levels.items() if x in lv}:
            old = levels.get(k, {}).get(x)
            new = new_lv.get(k)
            if old != new:
                report.changed[(k, x)] = (old, new)
                rebuild.add(k)
                if new is None:
                    levels[k].pop(x)
                else:
                    levels.setdefault(k, {})[x] = new
        if not any(prof[x]):
            del prof[x]

    forests = dict(idx.forests)
    for k in sorted(rebuild):
        lv = levels.get(k)
        if lv:
            forests[(k, t)] = forest_from_thresholds(g, k, t, lv, grid)
        else:
            forests.pop((k, t), None)
    k_max = list(idx.k_max)
    k_max[t] = max((k for k, lv in levels.items() if lv), default=0)
    report.rebuilt_k = sorted(rebuild)
    log.debug("delta on t=%d: %d threshold changes, re-treed k=%s", t, len(report.changed), report.rebuilt_k)
    new_idx = WcfIndex(grid, idx.vertex_count, idx.num_snapshots, forests, k_max, None)
    return new_idx, net.with_snapshot(t, g)


def parse_delta(lines: Iterable[str], net: DynamicNetwork, t: int) -> GraphDelta:
    """Read ``I u v w`` / ``D u v`` / ``W u v w_new`` lines with vertex labels."""
    updates = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        op = parts[0].upper()
        want = {"I": 4, "D": 3, "W": 4}.get(op)
        if want is None:
            raise ParseError(f"unknown update kind {parts[0]!r}", lineno)
        if len(parts) != want:
            raise ParseError(f"expected {want} fields, got {len(parts)}", lineno)
        try:
            u, v = net.label_to_id[parts[1]], net.label_to_id[parts[2]]
        except KeyError as exc:
            raise ParseError(f"unknown vertex label {exc.args[0]!r}", lineno) from None
        try:
            w = float(parts[3]) if want == 4 else None
        except ValueError:
            raise ParseError(f"bad weight {parts[3]!r}", lineno) from None
        if op == "I":
            updates.append(EdgeUpdate.insert(u, v, w))
        elif op == "D":
            updates.append(EdgeUpdate.delete(u, v))
        else:
            updates.append(EdgeUpdate.reweight(u, v, w))
    return GraphDelta(t, updates)
