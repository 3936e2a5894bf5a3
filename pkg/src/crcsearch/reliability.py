"""Reliability score, normalizers, upper bounds and the answer ordering."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .coredec import adjacency_from_edges, component, max_component_kcore_size
from .dyngraph import DynamicNetwork, Edge
from .errors import UndefinedContextError

# Scores closer than this are treated as equal and fall through to tie-breaks.
SCORE_TOL = 1e-9


@dataclass(frozen=True)
class ReliabilityContext:
    v_k_max: int
    window_len: int
    alpha: float = 1.0


@dataclass(frozen=True)
class Community:
    vertices: frozenset[int]
    edges: frozenset[Edge]
    interval: tuple[int, int]
    score: float

    @property
    def size(self) -> int:
        return len(self.vertices)

    @property
    def duration(self) -> int:
        return self.interval[1] - self.interval[0] + 1

    @property
    def start(self) -> int:
        return self.interval[0]

    def to_dict(self, labels: Sequence[str] | None = None) -> dict:
        def name(v: int):
            return labels[v] if labels is not None else v

        return {
            "vertices": [name(v) for v in sorted(self.vertices)],
            "edges": [[name(u), name(v)] for u, v in sorted(self.edges)],
            "interval": list(self.interval),
            "size": self.size,
            "duration": self.duration,
            "score": self.score,
        }


def score(size: int, duration: int, ctx: ReliabilityContext) -> float:
    """Weighted harmonic combination of normalized size and duration."""
    if ctx.v_k_max <= 0 or ctx.window_len <= 0:
        raise UndefinedContextError("reliability normalizers must be positive")
    if size <= 0 or duration <= 0:
        return 0.0
    nv = size / ctx.v_k_max
    nt = duration / ctx.window_len
    a2 = ctx.alpha * ctx.alpha
    return (1.0 + a2) * nv * nt / (a2 * nv + nt)


def _score_real(nv: float, nt: float, alpha: float) -> float:
    if nv <= 0 or nt <= 0:
        return 0.0
    a2 = alpha * alpha
    return (1.0 + a2) * nv * nt / (a2 * nv + nt)


def max_kcore_size(net: DynamicNetwork, k: int, window: tuple[int, int]) -> int:
    return max(
        (max_component_kcore_size(net[t], k) for t in range(window[0], window[1] + 1)),
        default=0,
    )


def ubr_edge_set(num_eligible_edges: int, k: int, duration: int, ctx: ReliabilityContext) -> float:
    """Score bound for any CRC drawn from an edge set of the given size.

    A k-core with |V'| vertices needs at least k|V'|/2 edges, so
    |V'| <= 2|E|/k.  N(V) is clamped to 1.
    """
    if num_eligible_edges <= 0:
        return 0.0
    nv = min(1.0, (2.0 * num_eligible_edges / k) / ctx.v_k_max)
    return _score_real(nv, duration / ctx.window_len, ctx.alpha)


def longest_run_at_least(sizes: Sequence[int], n: int) -> int:
    """Length of the maximal run around position n whose entries are >= sizes[n]."""
    mu = sizes[n]
    lo = n
    while lo > 0 and sizes[lo - 1] >= mu:
        lo -= 1
    hi = n
    while hi + 1 < len(sizes) and sizes[hi + 1] >= mu:
        hi += 1
    return hi - lo + 1


def ubr_interval(sizes: Sequence[int], base_duration: int, ctx: ReliabilityContext) -> float:
    """Bound on CRCs of duration >= base_duration inside one anchor-free interval.

    ``sizes[i]`` is |C(base_duration, t)| for consecutive end timestamps t
    (0 where the entry is absent).
    """
    best = 0.0
    for n, mu in enumerate(sizes):
        if mu <= 0:
            continue
        span = base_duration + longest_run_at_least(sizes, n) - 1
        best = max(best, score(mu, span, ctx))
    return best


def is_better(cand: Community, incumbent: Community | None) -> bool:
    """Strict preference: score, then longer, earlier, smaller, lexicographic."""
    if incumbent is None:
        return True
    if cand.score > incumbent.score + SCORE_TOL:
        return True
    if cand.score < incumbent.score - SCORE_TOL:
        return False
    if cand.duration != incumbent.duration:
        return cand.duration > incumbent.duration
    if cand.start != incumbent.start:
        return cand.start < incumbent.start
    if cand.size != incumbent.size:
        return cand.size < incumbent.size
    return sorted(cand.vertices) < sorted(incumbent.vertices)


def prunable(bound: float, incumbent: Community | None) -> bool:
    """True when nothing scoring at most ``bound`` can beat or tie the incumbent."""
    return incumbent is not None and bound < incumbent.score - SCORE_TOL


def is_crc(net: DynamicNetwork, edges, interval: tuple[int, int], theta: float, k: int, q: int) -> bool:
    """Whether one fixed edge set is a connected (theta,k)-core holding q at every t."""
    adj = adjacency_from_edges(edges)
    if q not in adj or any(len(nbrs) < k for nbrs in adj.values()):
        return False
    if len(component(adj, q)) != len(adj):
        return False
    for t in range(interval[0], interval[1] + 1):
        g = net[t]
        for u, v in edges:
            w = g.weight(u, v)
            if w is None or w < theta:
                return False
    return True
