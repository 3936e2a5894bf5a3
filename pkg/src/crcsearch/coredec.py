"""Core decomposition and local (theta,k)-core extraction."""
from __future__ import annotations

from collections import deque
from typing import Iterable, Mapping, Union

from .dyngraph import Edge, GraphInstance, edge_key

CoreNumbers = dict[int, int]
Adjacency = Mapping[int, Iterable[int]]
LocalCore = tuple[frozenset[int], frozenset[Edge]]


def _as_adj(g: Union[GraphInstance, Adjacency]) -> Mapping[int, Iterable[int]]:
    if isinstance(g, GraphInstance):
        return {v: g.neighbors(v).keys() for v in g.vertices()}
    return g


def adjacency_from_edges(edges: Iterable[Edge]) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = {}
    for u, v in edges:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    return adj


def core_decompose(g: Union[GraphInstance, Adjacency]) -> CoreNumbers:
    """Core number of every non-isolated vertex, by bucket-queue peeling in O(|E|)."""
    adj = _as_adj(g)
    deg = {v: len(nbrs) for v, nbrs in adj.items()}
    if not deg:
        return {}
    max_deg = max(deg.values())
    bins = [0] * (max_deg + 1)
    for d in deg.values():
        bins[d] += 1
    start = 0
    for d in range(max_deg + 1):
        bins[d], start = start, start + bins[d]
    pos: dict[int, int] = {}
    vert: list[int] = [0] * len(deg)
    for v in adj:
        pos[v] = bins[deg[v]]
        vert[pos[v]] = v
        bins[deg[v]] += 1
    for d in range(max_deg, 0, -1):
        bins[d] = bins[d - 1]
    bins[0] = 0
    for i in range(len(vert)):
        v = vert[i]
        for u in adj[v]:
            if deg[u] > deg[v]:
                du, pu = deg[u], pos[u]
                pw = bins[du]
                w = vert[pw]
                if u != w:
                    pos[u], vert[pu] = pw, w
                    pos[w], vert[pw] = pu, u
                bins[du] += 1
                deg[u] -= 1
    return deg


def peel(adj: Adjacency, k: int) -> set[int]:
    """Vertex set of the (possibly disconnected) k-core of ``adj``."""
    deg = {v: len(nbrs) for v, nbrs in adj.items()}
    alive = set(deg)
    queue = deque(v for v, d in deg.items() if d < k)
    while queue:
        v = queue.popleft()
        if v not in alive:
            continue
        alive.discard(v)
        for u in adj[v]:
            if u in alive:
                deg[u] -= 1
                if deg[u] < k:
                    queue.append(u)
    return alive


def component(adj: Adjacency, start: int, allowed: set[int] | None = None) -> set[int]:
    """Vertices reachable from ``start`` (optionally only through ``allowed``)."""
    if start not in adj or (allowed is not None and start not in allowed):
        return set()
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for u in adj[v]:
            if u not in seen and (allowed is None or u in allowed):
                seen.add(u)
                queue.append(u)
    return seen


def components(adj: Adjacency, allowed: set[int] | None = None) -> list[set[int]]:
    pool = set(adj) if allowed is None else set(allowed) & set(adj)
    out = []
    while pool:
        comp = component(adj, min(pool), pool)
        pool -= comp
        out.append(comp)
    return out


def _result(adj: Adjacency, comp: set[int]) -> LocalCore:
    edges = frozenset(edge_key(u, v) for u in comp for v in adj[u] if v in comp and u < v)
    return frozenset(comp), edges


def local_core_of_adjacency(adj: Adjacency, k: int, q: int) -> LocalCore | None:
    """q's connected component of the k-core of ``adj`` with its internal edges."""
    if q not in adj:
        return None
    core = peel(adj, k)
    if q not in core:
        return None
    return _result(adj, component(adj, q, core))


def extract_local_core(edges: Iterable[Edge], k: int, q: int) -> LocalCore | None:
    """Local maximal k-core containing q of the graph formed by ``edges``."""
    return local_core_of_adjacency(adjacency_from_edges(edges), k, q)


def local_max_kcore(g: GraphInstance, k: int, q: int) -> LocalCore | None:
    if q not in g:
        return None
    adj = _as_adj(g)
    cores = core_decompose(adj)
    if cores.get(q, 0) < k:
        return None
    keep = {v for v, c in cores.items() if c >= k}
    return _result(adj, component(adj, q, keep))


def theta_k_core(g: GraphInstance, theta: float, k: int, q: int) -> LocalCore | None:
    """Connected k-core containing q whose edges all weigh at least theta."""
    return local_core_of_adjacency(g.adjacency(theta), k, q)


def max_component_kcore_size(g: GraphInstance, k: int) -> int:
    """Size of the largest connected k-core component of g (no weight filter)."""
    adj = _as_adj(g)
    core = peel(adj, k)
    return max((len(c) for c in components(adj, core)), default=0)
