"""Threshold forests: per (k, t), vertices grouped by the largest grid weight
at which they still sit in a k-core, arranged so that lower thresholds are
ancestors of higher ones.

A query for (k, theta, t, q) walks the tree from q's node through nodes whose
threshold is at least the grid floor of theta, then re-extracts the exact
k-core from the snapshot restricted to the collected vertices.
"""
from __future__ import annotations

import io
import json
import logging
import struct
import zlib
from bisect import bisect_right
from collections import defaultdict, deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import IO, TYPE_CHECKING, Iterable, Sequence

from .coredec import LocalCore, core_decompose, local_core_of_adjacency
from .dyngraph import DynamicNetwork, GraphInstance
from .errors import (
    ChecksumError,
    ConfigurationError,
    DanglingReferenceError,
    IndexFormatError,
    VersionMismatchError,
)

if TYPE_CHECKING:
    from .index_compress import AuxiliaryTable

log = logging.getLogger(__name__)

# i/10 (not i*0.1) so that grid values compare equal to the literals 0.1 .. 1.0
DEFAULT_GRID: tuple[float, ...] = tuple(i / 10 for i in range(11))

INDEX_MAGIC = b"WCFI"
INDEX_VERSION = 1
FLAG_COMPRESSED = 1

# vertex -> grid level, for one k
LevelMap = dict[int, int]


def floor_level(w: float, grid: Sequence[float] = DEFAULT_GRID) -> int:
    """Position of the largest grid value <= w."""
    return bisect_right(grid, w) - 1


def check_grid(grid: Sequence[float]) -> tuple[float, ...]:
    grid = tuple(float(x) for x in grid)
    if not grid or grid[0] != 0.0:
        raise ConfigurationError("threshold grid must start at 0")
    if any(b <= a for a, b in zip(grid, grid[1:])) or grid[-1] > 1.0:
        raise ConfigurationError("threshold grid must be strictly increasing within [0,1]")
    if len(grid) > 255:
        raise ConfigurationError("threshold grid too fine for the index format")
    return grid


@dataclass
class ThetaTreeNode:
    node_id: int
    level: int
    theta: float
    vertices: frozenset[int] | None = None
    virtual_ref: int | None = None
    parent: int | None = None
    children: list[int] = field(default_factory=list)

    @property
    def is_virtual(self) -> bool:
        return self.virtual_ref is not None


@dataclass
class ThetaForest:
    k: int
    t: int
    nodes: list[ThetaTreeNode]
    locator: dict[int, int]

    @property
    def roots(self) -> list[int]:
        return [n.node_id for n in self.nodes if n.parent is None]


@dataclass
class WcfIndex:
    grid: tuple[float, ...]
    vertex_count: int
    num_snapshots: int
    forests: dict[tuple[int, int], ThetaForest]
    k_max: list[int]
    aux: AuxiliaryTable | None = None

    def forest(self, k: int, t: int) -> ThetaForest | None:
        return self.forests.get((k, t))

    def node_vertices(self, node: ThetaTreeNode) -> frozenset[int]:
        if node.vertices is not None:
            return node.vertices
        if self.aux is None or node.virtual_ref not in self.aux.entries:
            raise DanglingReferenceError(f"virtual node {node.virtual_ref} has no table entry")
        return frozenset(self.aux.entries[node.virtual_ref])

    def threshold(self, k: int, t: int, v: int) -> float | None:
        f = self.forests.get((k, t))
        if f is None or v not in f.locator:
            return None
        return f.nodes[f.locator[v]].theta

    def levels(self, t: int) -> dict[int, LevelMap]:
        """Stored threshold levels for snapshot t, keyed by k then vertex."""
        return {
            k: {v: f.nodes[nid].level for v, nid in f.locator.items()}
            for (k, tt), f in self.forests.items()
            if tt == t
        }

    def max_component_size(self, k: int, t: int) -> int:
        """Largest connected k-core component of G_t: one tree per component."""
        f = self.forests.get((k, t))
        if f is None:
            return 0
        size: dict[int, int] = defaultdict(int)
        for nid in f.locator.values():
            size[_root_of(f, nid)] += 1
        return max(size.values(), default=0)

    def slot_count(self) -> int:
        """Stored vertex slots: plain members, one per virtual ref, plus the table."""
        total = 0
        for f in self.forests.values():
            for n in f.nodes:
                total += 1 if n.is_virtual else len(n.vertices)
        if self.aux is not None:
            total += sum(len(vs) for vs in self.aux.entries.values())
        return total

    def check_matches(self, net: DynamicNetwork) -> None:
        if self.vertex_count != net.vertex_count or self.num_snapshots != net.num_snapshots:
            raise ConfigurationError(
                f"index built for |V|={self.vertex_count}, |T|={self.num_snapshots} "
                f"but network has |V|={net.vertex_count}, |T|={net.num_snapshots}"
            )


def _root_of(f: ThetaForest, nid: int) -> int:
    while f.nodes[nid].parent is not None:
        nid = f.nodes[nid].parent
    return nid


# -- construction ---------------------------------------------------------

def threshold_levels(g: GraphInstance, grid: Sequence[float] = DEFAULT_GRID) -> dict[int, LevelMap]:
    """Grid threshold of every vertex at every k, by a descending weight sweep.

    At each grid value the filtered snapshot is core-decomposed; a vertex whose
    core number rose from c0 to c1 gets this level for k in (c0, c1].
    """
    out: dict[int, LevelMap] = defaultdict(dict)
    prev: dict[int, int] = {}
    for i in range(len(grid) - 1, -1, -1):
        cores = core_decompose(g.adjacency(grid[i]))
        for v, c in cores.items():
            for k in range(prev.get(v, 0) + 1, c + 1):
                out[k][v] = i
        prev = cores
    return dict(out)


class _UnionFind:
    def __init__(self):
        self.parent: dict[int, int] = {}

    def add(self, x: int) -> None:
        self.parent[x] = x

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def forest_from_thresholds(
    g: GraphInstance,
    k: int,
    t: int,
    levels: LevelMap,
    grid: Sequence[float] = DEFAULT_GRID,
) -> ThetaForest:
    """Arrange vertices with known threshold levels into a forest.

    Levels are swept from high to low.  An edge joins the picture at the
    lowest of its own grid floor and its endpoints' levels.  Vertices that
    first appear at a level form one node per connected group and adopt the
    current top nodes of whatever they connect.  When a level only joins
    existing groups, their top nodes of minimum level are merged and the rest
    hang below the merged node.
    """
    new_at: dict[int, list[int]] = defaultdict(list)
    for v, lv in levels.items():
        new_at[lv].append(v)
    edges_at: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for u, v, w in g.edges():
        if u in levels and v in levels:
            edges_at[min(floor_level(w, grid), levels[u], levels[v])].append((u, v))

    uf = _UnionFind()
    top: dict[int, int] = {}  # union-find root -> current top node
    n_level: list[int] = []
    n_verts: list[set[int]] = []
    n_parent: list[int | None] = []
    alive: list[bool] = []

    def new_node(level: int, verts: Iterable[int]) -> int:
        n_level.append(level)
        n_verts.append(set(verts))
        n_parent.append(None)
        alive.append(True)
        return len(n_level) - 1

    for i in sorted(set(new_at) | set(edges_at), reverse=True):
        fresh = sorted(new_at.get(i, ()))
        es = edges_at.get(i, ())
        for v in fresh:
            uf.add(v)
        involved = set(fresh)
        for u, v in es:
            involved.add(u)
            involved.add(v)
        old_root = {v: uf.find(v) for v in involved}
        for u, v in es:
            uf.union(u, v)

        groups: dict[int, tuple[list[int], set[int]]] = {}
        for v in sorted(involved):
            r = uf.find(v)
            fresh_here, tops = groups.setdefault(r, ([], set()))
            if levels[v] == i:
                fresh_here.append(v)
            if old_root[v] in top:
                tops.add(top[old_root[v]])
        for v in involved:
            top.pop(old_root[v], None)

        for r, (fresh_here, tops) in sorted(groups.items()):
            if fresh_here:
                x = new_node(i, fresh_here)
                for old in tops:
                    n_parent[old] = x
                top[r] = x
            elif len(tops) >= 2:
                low = min(n_level[o] for o in tops)
                heads = sorted(o for o in tops if n_level[o] == low)
                keep = heads[0]
                for h in heads[1:]:
                    n_verts[keep] |= n_verts[h]
                    alive[h] = False
                    for c, p in enumerate(n_parent):
                        if p == h:
                            n_parent[c] = keep
                for o in tops:
                    if n_level[o] != low:
                        n_parent[o] = keep
                top[r] = keep
            else:
                top[r] = next(iter(tops))

    remap: dict[int, int] = {}
    for old, ok in enumerate(alive):
        if ok:
            remap[old] = len(remap)
    nodes = [
        ThetaTreeNode(
            node_id=remap[old],
            level=n_level[old],
            theta=grid[n_level[old]],
            vertices=frozenset(n_verts[old]),
            parent=remap[n_parent[old]] if n_parent[old] is not None else None,
        )
        for old in remap
    ]
    for n in nodes:
        if n.parent is not None:
            nodes[n.parent].children.append(n.node_id)
    locator = {v: n.node_id for n in nodes for v in n.vertices}
    return ThetaForest(k, t, nodes, locator)


def build_snapshot(
    g: GraphInstance, t: int, grid: Sequence[float] = DEFAULT_GRID
) -> tuple[dict[int, ThetaForest], int]:
    """All forests of one snapshot and its largest core number."""
    levels = threshold_levels(g, grid)
    forests = {k: forest_from_thresholds(g, k, t, lv, grid) for k, lv in levels.items()}
    return forests, max(levels, default=0)


def _build_one(args):
    g, t, grid = args
    return build_snapshot(g, t, grid)


def build(net: DynamicNetwork, grid: Sequence[float] = DEFAULT_GRID, workers: int = 1) -> WcfIndex:
    """Index every snapshot; snapshots are independent and may use a process pool."""
    grid = check_grid(grid)
    jobs = [(net[t], t, grid) for t in range(net.num_snapshots)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_build_one, jobs))
    else:
        results = [_build_one(j) for j in jobs]
    forests: dict[tuple[int, int], ThetaForest] = {}
    k_max = []
    for t, (per_k, km) in enumerate(results):
        for k, f in per_k.items():
            forests[(k, t)] = f
        k_max.append(km)
    log.debug("built index over %d snapshots, %d forests", net.num_snapshots, len(forests))
    return WcfIndex(grid, net.vertex_count, net.num_snapshots, forests, k_max)


# -- queries --------------------------------------------------------------

def query_c1(idx: WcfIndex, graph: GraphInstance, k: int, theta: float, t: int, q: int) -> LocalCore | None:
    """Local maximal (theta,k)-core of q in snapshot t, located through the index.

    ``graph`` must be the snapshot the index was built from; it supplies the
    edges between the vertices the tree walk collects.
    """
    f = idx.forests.get((k, t))
    if f is None or q not in f.locator:
        return None
    floor = floor_level(theta, idx.grid)
    start = f.locator[q]
    if f.nodes[start].level < floor:
        return None
    seen = {start}
    queue = deque([start])
    verts: set[int] = set()
    while queue:
        nid = queue.popleft()
        node = f.nodes[nid]
        verts |= idx.node_vertices(node)
        nxt = list(node.children)
        if node.parent is not None:
            nxt.append(node.parent)
        for m in nxt:
            if m not in seen and f.nodes[m].level >= floor:
                seen.add(m)
                queue.append(m)
    adj = {v: {u for u, w in graph.neighbors(v).items() if w >= theta and u in verts} for v in verts}
    return local_core_of_adjacency(adj, k, q)


# -- structural comparison -----------------------------------------------

def canonical_forest(idx: WcfIndex, f: ThetaForest) -> frozenset:
    """Node-id free description: (members, level, parent members) per node."""
    members = [idx.node_vertices(n) for n in f.nodes]
    return frozenset(
        (members[n.node_id], n.level, members[n.parent] if n.parent is not None else None)
        for n in f.nodes
    )


def canonical(idx: WcfIndex) -> dict[tuple[int, int], frozenset]:
    return {key: canonical_forest(idx, f) for key, f in idx.forests.items()}


def structurally_equal(a: WcfIndex, b: WcfIndex) -> bool:
    return (
        a.grid == b.grid
        and a.vertex_count == b.vertex_count
        and a.num_snapshots == b.num_snapshots
        and a.k_max == b.k_max
        and canonical(a) == canonical(b)
    )


# -- binary format --------------------------------------------------------

_HEADER = "<4sHHIIB"


def to_bytes(idx: WcfIndex) -> bytes:
    buf = io.BytesIO()
    flags = FLAG_COMPRESSED if idx.aux is not None and idx.aux.entries else 0
    buf.write(struct.pack(_HEADER, INDEX_MAGIC, INDEX_VERSION, flags,
                          idx.vertex_count, idx.num_snapshots, len(idx.grid)))
    buf.write(struct.pack(f"<{len(idx.grid)}d", *idx.grid))
    buf.write(struct.pack(f"<{idx.num_snapshots}I", *idx.k_max))
    buf.write(struct.pack("<I", len(idx.forests)))
    for (k, t) in sorted(idx.forests, key=lambda kt: (kt[1], kt[0])):
        f = idx.forests[(k, t)]
        buf.write(struct.pack("<III", k, t, len(f.nodes)))
        for n in f.nodes:
            parent = -1 if n.parent is None else n.parent
            if n.is_virtual:
                buf.write(struct.pack("<BiiI", n.level, parent, -1, n.virtual_ref))
            else:
                vs = sorted(n.vertices)
                buf.write(struct.pack(f"<Bii{len(vs)}I", n.level, parent, len(vs), *vs))
    entries = idx.aux.entries if idx.aux is not None else {}
    buf.write(struct.pack("<I", len(entries)))
    for ref in range(len(entries)):
        vs = entries[ref]
        buf.write(struct.pack(f"<I{len(vs)}I", len(vs), *vs))
    body = buf.getvalue()
    return body + struct.pack("<I", zlib.crc32(body))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, fmt: str):
        try:
            vals = struct.unpack_from(fmt, self.data, self.pos)
        except struct.error as exc:
            raise IndexFormatError(f"index body ends early: {exc}") from None
        self.pos += struct.calcsize(fmt)
        return vals


def from_bytes(data: bytes) -> WcfIndex:
    from .index_compress import AuxiliaryTable

    if len(data) < struct.calcsize(_HEADER) + 4:
        raise ChecksumError("index file truncated")
    body, (crc,) = data[:-4], struct.unpack("<I", data[-4:])
    if data[:4] != INDEX_MAGIC:
        raise IndexFormatError("not an index file")
    if zlib.crc32(body) != crc:
        raise ChecksumError("index file checksum mismatch")
    r = _Reader(body)
    _magic, version, _flags, n, t_count, glen = r.take(_HEADER)
    if version != INDEX_VERSION:
        raise VersionMismatchError(f"index format version {version}, expected {INDEX_VERSION}")
    grid = r.take(f"<{glen}d")
    k_max = list(r.take(f"<{t_count}I"))
    (count,) = r.take("<I")
    raw_forests = []
    for _ in range(count):
        k, t, size = r.take("<III")
        nodes = []
        for nid in range(size):
            level, parent, cnt = r.take("<Bii")
            node = ThetaTreeNode(nid, level, grid[level], parent=None if parent < 0 else parent)
            if cnt < 0:
                (node.virtual_ref,) = r.take("<I")
            else:
                node.vertices = frozenset(r.take(f"<{cnt}I"))
            nodes.append(node)
        for node in nodes:
            if node.parent is not None:
                nodes[node.parent].children.append(node.node_id)
        raw_forests.append((k, t, nodes))
    (aux_count,) = r.take("<I")
    entries = {}
    for ref in range(aux_count):
        (size,) = r.take("<I")
        entries[ref] = tuple(r.take(f"<{size}I"))
    if r.pos != len(body):
        raise IndexFormatError("trailing bytes after index body")
    idx = WcfIndex(grid, n, t_count, {}, k_max, AuxiliaryTable.from_entries(entries) if entries else None)
    for k, t, nodes in raw_forests:
        locator = {v: node.node_id for node in nodes for v in idx.node_vertices(node)}
        idx.forests[(k, t)] = ThetaForest(k, t, nodes, locator)
    return idx


def save(idx: WcfIndex, sink: str | IO[bytes]) -> None:
    data = to_bytes(idx)
    if isinstance(sink, (str, bytes)) or hasattr(sink, "__fspath__"):
        with open(sink, "wb") as fh:
            fh.write(data)
    else:
        sink.write(data)


def load(source: str | IO[bytes]) -> WcfIndex:
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, "rb") as fh:
            return from_bytes(fh.read())
    return from_bytes(source.read())


# -- JSON debug export ----------------------------------------------------

def to_json(idx: WcfIndex) -> dict:
    forests = []
    for (k, t) in sorted(idx.forests, key=lambda kt: (kt[1], kt[0])):
        nodes = []
        for n in idx.forests[(k, t)].nodes:
            rec = {"id": n.node_id, "theta": n.theta, "parent": n.parent}
            if n.is_virtual:
                rec["ref"] = n.virtual_ref
            else:
                rec["vertices"] = sorted(n.vertices)
            nodes.append(rec)
        forests.append({"k": k, "t": t, "nodes": nodes})
    return {
        "format": "wcf-index",
        "version": INDEX_VERSION,
        "grid": list(idx.grid),
        "vertex_count": idx.vertex_count,
        "num_snapshots": idx.num_snapshots,
        "k_max": list(idx.k_max),
        "forests": forests,
        "aux": {str(r): list(vs) for r, vs in sorted(idx.aux.entries.items())} if idx.aux else {},
    }


def from_json(doc: dict | str) -> WcfIndex:
    from .index_compress import AuxiliaryTable

    if isinstance(doc, str):
        doc = json.loads(doc)
    if doc.get("version") != INDEX_VERSION:
        raise VersionMismatchError(f"index JSON version {doc.get('version')}")
    grid = check_grid(doc["grid"])
    entries = {int(r): tuple(vs) for r, vs in doc.get("aux", {}).items()}
    idx = WcfIndex(grid, doc["vertex_count"], doc["num_snapshots"], {}, list(doc["k_max"]),
                   AuxiliaryTable.from_entries(entries) if entries else None)
    for rec in doc["forests"]:
        nodes = []
        for nd in rec["nodes"]:
            level = floor_level(nd["theta"], grid)
            node = ThetaTreeNode(nd["id"], level, grid[level], parent=nd["parent"])
            if "ref" in nd:
                node.virtual_ref = nd["ref"]
            else:
                node.vertices = frozenset(nd["vertices"])
            nodes.append(node)
        for node in nodes:
            if node.parent is not None:
                nodes[node.parent].children.append(node.node_id)
        locator = {v: node.node_id for node in nodes for v in idx.node_vertices(node)}
        idx.forests[(rec["k"], rec["t"])] = ThetaForest(rec["k"], rec["t"], nodes, locator)
    return idx
