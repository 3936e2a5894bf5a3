"""A hand-built 10-vertex, 3-snapshot network used by the docs and tests.

Vertex ``i`` carries label ``"v{i}"``.  The weights are chosen so that:

* (v0,v1) has weight >= 0.6 in the first two snapshots only;
* {v0,v2,v3,v4} is a 4-clique with every edge >= 0.4 in snapshots 0 and 1;
* with k=2 and theta=0.5, q=v0 sits in {v0..v4} at t=0,1 and {v0..v3} at t=2;
* {v7,v8,v9} is a strong triangle joined to the rest by weak edges only;
* inserting (v3,v5) with weight 0.3 into snapshot 0 lifts v5 and v6 only.
"""
from __future__ import annotations

from .dyngraph import DynamicNetwork, GraphInstance

_T0 = [
    (0, 1, 0.7), (0, 2, 0.5), (0, 3, 0.4), (0, 4, 0.4), (1, 3, 0.5),
    (2, 3, 0.8), (2, 4, 0.6), (3, 4, 0.7),
    (7, 8, 0.9), (8, 9, 0.8), (7, 9, 0.7),
    (5, 6, 0.3), (6, 8, 0.3), (5, 7, 0.2),
    (0, 5, 0.1), (2, 6, 0.1), (2, 8, 0.1), (3, 7, 0.1), (5, 8, 0.1), (6, 7, 0.1),
]

_T1 = [(u, v, 0.6 if (u, v) == (0, 1) else w) for u, v, w in _T0 if (u, v) != (2, 8)]

_T2 = [
    (0, 1, 0.5), (0, 2, 0.5), (0, 3, 0.4), (0, 4, 0.4), (1, 3, 0.5),
    (2, 3, 0.8), (2, 4, 0.6), (3, 4, 0.3),
    (7, 8, 0.9), (8, 9, 0.8), (7, 9, 0.7),
    (5, 6, 0.3), (6, 8, 0.3), (5, 7, 0.2),
    (0, 5, 0.1), (2, 6, 0.1), (3, 7, 0.1), (6, 7, 0.1),
]

LABELS = tuple(f"v{i}" for i in range(10))
INSERTED_EDGE = (3, 5, 0.3)


def toy_edges() -> list[list[tuple[int, int, float]]]:
    return [list(_T0), list(_T1), list(_T2)]


def toy_network() -> DynamicNetwork:
    return DynamicNetwork.from_edge_lists(toy_edges(), 10, LABELS)


def toy_snapshot_with_insertion() -> GraphInstance:
    """Snapshot 0 with the extra (v3,v5) edge."""
    return GraphInstance.from_edges(_T0 + [INSERTED_EDGE])


def toy_edge_stream() -> str:
    """The toy network as ``u v t w`` text (one timestamp per snapshot)."""
    lines = ["# toy network: u v t w"]
    for t, edges in enumerate(toy_edges()):
        for u, v, w in edges:
            lines.append(f"{LABELS[u]} {LABELS[v]} {t} {w}")
    return "\n".join(lines) + "\n"
