"""Dynamic weighted graph model, edge-stream ingestion and binary snapshots.

A :class:`DynamicNetwork` is an ordered tuple of :class:`GraphInstance`
snapshots over one dense vertex universe ``0..vertex_count-1``.  Timestamps
are snapshot indices; wall-clock values from the input only decide order.
"""
from __future__ import annotations

import io
import struct
import zlib
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import IO, Iterable, Iterator, Mapping

import numpy as np

from .errors import (
    ChecksumError,
    ConfigurationError,
    IndexFormatError,
    InvariantViolation,
    ParameterError,
    ParseError,
    VersionMismatchError,
)

Edge = tuple[int, int]

NETWORK_MAGIC = b"DYNG"
NETWORK_VERSION = 1


def edge_key(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class GraphInstance:
    """One undirected weighted snapshot.

    Treated as immutable: every "modification" returns a new instance.
    Isolated vertices are never stored.
    """

    __slots__ = ("_adj", "_m")

    def __init__(self, adj: dict[int, dict[int, float]] | None = None):
        self._adj: dict[int, dict[int, float]] = adj if adj is not None else {}
        self._m = sum(len(nbrs) for nbrs in self._adj.values()) // 2

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int, float]]) -> GraphInstance:
        adj: dict[int, dict[int, float]] = defaultdict(dict)
        for u, v, w in edges:
            if u == v:
                raise InvariantViolation(f"self-loop on vertex {u}")
            if not 0.0 < w <= 1.0:
                raise InvariantViolation(f"edge ({u},{v}) weight {w} outside (0,1]")
            if v in adj[u]:
                raise InvariantViolation(f"duplicate edge ({u},{v})")
            adj[u][v] = w
            adj[v][u] = w
        return cls(dict(adj))

    # accessors
    @property
    def edge_count(self) -> int:
        return self._m

    def vertices(self) -> Iterator[int]:
        return iter(self._adj)

    def __contains__(self, v: int) -> bool:
        return v in self._adj

    def neighbors(self, v: int) -> Mapping[int, float]:
        return self._adj.get(v, {})

    def degree(self, v: int) -> int:
        return len(self._adj.get(v, ()))

    def weight(self, u: int, v: int) -> float | None:
        return self._adj.get(u, {}).get(v)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj.get(u, ())

    def edges(self) -> Iterator[tuple[int, int, float]]:
        """Yield each edge once as ``(u, v, w)`` with ``u < v``, sorted."""
        for u in sorted(self._adj):
            for v in sorted(self._adj[u]):
                if u < v:
                    yield u, v, self._adj[u][v]

    def edge_set(self, theta: float = 0.0) -> set[Edge]:
        return {(u, v) for u, v, w in self.edges() if w >= theta}

    def adjacency(self, theta: float = 0.0) -> dict[int, set[int]]:
        """Unweighted adjacency of the subgraph with edges of weight >= theta."""
        adj: dict[int, set[int]] = {}
        for u, nbrs in self._adj.items():
            keep = {v for v, w in nbrs.items() if w >= theta}
            if keep:
                adj[u] = keep
        return adj

    def with_edge_weight(self, u: int, v: int, w: float | None) -> GraphInstance:
        """Copy with edge (u,v) set to weight w, or removed when w is None."""
        adj = {x: dict(nbrs) for x, nbrs in self._adj.items()}
        if w is None:
            adj[u].pop(v, None)
            adj[v].pop(u, None)
            for x in (u, v):
                if not adj.get(x):
                    adj.pop(x, None)
        else:
            adj.setdefault(u, {})[v] = w
            adj.setdefault(v, {})[u] = w
        return GraphInstance(adj)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GraphInstance):
            return NotImplemented
        return self._adj == other._adj

    def __repr__(self) -> str:
        return f"GraphInstance(|V|={len(self._adj)}, |E|={self._m})"


def degree(v: int, g: GraphInstance) -> int:
    return g.degree(v)


def induced_by_edges(g: GraphInstance, edge_set: Iterable[Edge]) -> GraphInstance:
    """Subgraph containing exactly ``edge_set`` (weights copied from g)."""
    out: dict[int, dict[int, float]] = defaultdict(dict)
    for u, v in edge_set:
        w = g.weight(u, v)
        if w is None:
            raise InvariantViolation(f"edge ({u},{v}) is not in the graph")
        out[u][v] = w
        out[v][u] = w
    return GraphInstance(dict(out))


@dataclass(frozen=True)
class QueryParams:
    q: int
    k: int
    theta: float
    window: tuple[int, int]
    alpha: float = 1.0

    @property
    def window_len(self) -> int:
        return self.window[1] - self.window[0] + 1

    def validate(self, net: DynamicNetwork) -> None:
        ti, tj = self.window
        if not 0 <= ti <= tj < net.num_snapshots:
            raise ParameterError(
                f"window {self.window} outside snapshot range [0,{net.num_snapshots - 1}]"
            )
        if not 0 <= self.q < net.vertex_count:
            raise ParameterError(f"query vertex {self.q} not in the vertex universe")
        if self.k < 1:
            raise ParameterError("k must be a positive integer")
        if not 0.0 <= self.theta <= 1.0:
            raise ParameterError("theta must lie in [0,1]")
        if self.alpha < 0:
            raise ParameterError("alpha must be non-negative")


@dataclass(frozen=True)
class DynamicNetwork:
    snapshots: tuple[GraphInstance, ...]
    vertex_count: int
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(i) for i in range(self.vertex_count)))
        if len(self.labels) != self.vertex_count:
            raise ConfigurationError("label map size differs from vertex_count")
        for g in self.snapshots:
            for v in g.vertices():
                if not 0 <= v < self.vertex_count:
                    raise InvariantViolation(f"vertex {v} outside universe")

    @classmethod
    def from_edge_lists(
        cls,
        snapshots: Iterable[Iterable[tuple[int, int, float]]],
        vertex_count: int | None = None,
        labels: Iterable[str] | None = None,
    ) -> DynamicNetwork:
        graphs = tuple(GraphInstance.from_edges(es) for es in snapshots)
        labels = tuple(labels) if labels is not None else ()
        if vertex_count is None:
            vertex_count = len(labels) if labels else 1 + max(
                (v for g in graphs for v in g.vertices()), default=-1
            )
        return cls(graphs, vertex_count, labels)

    @property
    def num_snapshots(self) -> int:
        return len(self.snapshots)

    def __getitem__(self, t: int) -> GraphInstance:
        return self.snapshots[t]

    @cached_property
    def label_to_id(self) -> dict[str, int]:
        return {label: i for i, label in enumerate(self.labels)}

    def vertex_id(self, label: str) -> int:
        try:
            return self.label_to_id[label]
        except KeyError:
            raise ParameterError(f"unknown vertex label {label!r}") from None

    def with_snapshot(self, t: int, g: GraphInstance) -> DynamicNetwork:
        snaps = list(self.snapshots)
        snaps[t] = g
        return DynamicNetwork(tuple(snaps), self.vertex_count, self.labels)

    # binary serialization
    def to_bytes(self) -> bytes:
        buf = io.BytesIO()
        buf.write(struct.pack("<4sHHII", NETWORK_MAGIC, NETWORK_VERSION, 0,
                              self.vertex_count, self.num_snapshots))
        for g in self.snapshots:
            offsets = np.zeros(self.vertex_count + 1, dtype="<i8")
            nbrs: list[int] = []
            wts: list[float] = []
            for v in range(self.vertex_count):
                for u in sorted(g.neighbors(v)):
                    nbrs.append(u)
                    wts.append(g.neighbors(v)[u])
                offsets[v + 1] = len(nbrs)
            buf.write(offsets.tobytes())
            buf.write(np.asarray(nbrs, dtype="<i4").tobytes())
            buf.write(np.asarray(wts, dtype="<f8").tobytes())
        buf.write(struct.pack("<I", len(self.labels)))
        for label in self.labels:
            raw = label.encode("utf-8")
            buf.write(struct.pack("<I", len(raw)))
            buf.write(raw)
        body = buf.getvalue()
        return body + struct.pack("<I", zlib.crc32(body))

    @classmethod
    def from_bytes(cls, data: bytes) -> DynamicNetwork:
        if len(data) < 20:
            raise ChecksumError("network file truncated")
        body, (crc,) = data[:-4], struct.unpack("<I", data[-4:])
        if zlib.crc32(body) != crc:
            raise ChecksumError("network file checksum mismatch")
        magic, version, _flags, n, t_count = struct.unpack_from("<4sHHII", body, 0)
        if magic != NETWORK_MAGIC:
            raise IndexFormatError("not a dynamic network file")
        if version != NETWORK_VERSION:
            raise VersionMismatchError(f"network format version {version} unsupported")
        pos = struct.calcsize("<4sHHII")
        graphs = []
        for _ in range(t_count):
            offsets = np.frombuffer(body, dtype="<i8", count=n + 1, offset=pos)
            pos += 8 * (n + 1)
            m2 = int(offsets[-1])
            nbrs = np.frombuffer(body, dtype="<i4", count=m2, offset=pos)
            pos += 4 * m2
            wts = np.frombuffer(body, dtype="<f8", count=m2, offset=pos)
            pos += 8 * m2
            adj: dict[int, dict[int, float]] = {}
            for v in range(n):
                lo, hi = int(offsets[v]), int(offsets[v + 1])
                if hi > lo:
                    adj[v] = {int(u): float(w) for u, w in zip(nbrs[lo:hi], wts[lo:hi])}
            graphs.append(GraphInstance(adj))
        (count,) = struct.unpack_from("<I", body, pos)
        pos += 4
        labels = []
        for _ in range(count):
            (size,) = struct.unpack_from("<I", body, pos)
            pos += 4
            labels.append(body[pos:pos + size].decode("utf-8"))
            pos += size
        return cls(tuple(graphs), n, tuple(labels))

    def save(self, sink: str | IO[bytes]) -> None:
        data = self.to_bytes()
        if isinstance(sink, (str, bytes)) or hasattr(sink, "__fspath__"):
            with open(sink, "wb") as fh:
                fh.write(data)
        else:
            sink.write(data)

    @classmethod
    def load(cls, source: str | IO[bytes]) -> DynamicNetwork:
        if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
            with open(source, "rb") as fh:
                return cls.from_bytes(fh.read())
        return cls.from_bytes(source.read())


def _parse_lines(lines: Iterable[str], weight_mode: str):
    records = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if weight_mode == "given" and len(parts) != 4:
            raise ParseError(f"expected 'u v t w', got {len(parts)} fields", lineno)
        if weight_mode == "frequency" and len(parts) not in (3, 4):
            raise ParseError(f"expected 'u v t [w]', got {len(parts)} fields", lineno)
        u, v = parts[0], parts[1]
        try:
            t = float(parts[2])
            w = float(parts[3]) if weight_mode == "given" else 1.0
        except ValueError:
            raise ParseError(f"non-numeric field in {line!r}", lineno) from None
        if weight_mode == "given" and not w == w:  # NaN
            raise ParseError("weight is NaN", lineno)
        records.append((t, len(records), u, v, w))
    return records


def ingest_edge_stream(
    lines: Iterable[str],
    num_snapshots: int | None,
    weight_mode: str = "given",
    *,
    normalize: bool = True,
    partition: str = "count",
) -> DynamicNetwork:
    """Build a network from ``u v t w`` lines.

    ``partition="count"`` sorts edges chronologically and cuts them into
    ``num_snapshots`` runs of ``|E| // num_snapshots`` edges (the last run keeps
    the remainder).  ``partition="timestamp"`` makes one snapshot per distinct
    ``t`` value instead.  Duplicate pairs inside a snapshot are merged (max
    weight under ``given``, occurrence count under ``frequency``); weights are
    then min-max normalized over the whole stream and exact zeros dropped.
    """
    if weight_mode not in ("given", "frequency"):
        raise ConfigurationError(f"unknown weight mode {weight_mode!r}")
    if partition not in ("count", "timestamp"):
        raise ConfigurationError(f"unknown partition mode {partition!r}")
    records = [r for r in _parse_lines(lines, weight_mode) if r[2] != r[3]]
    records.sort(key=lambda r: (r[0], r[1]))

    if partition == "count":
        if num_snapshots is None or num_snapshots < 1:
            raise ConfigurationError("num_snapshots must be >= 1")
        if num_snapshots > len(records):
            raise ConfigurationError(
                f"num_snapshots={num_snapshots} exceeds the number of edges ({len(records)})"
            )
        size = len(records) // num_snapshots
        parts = [records[i * size:(i + 1) * size] for i in range(num_snapshots - 1)]
        parts.append(records[(num_snapshots - 1) * size:])
    else:
        by_t: dict[float, list] = defaultdict(list)
        for r in records:
            by_t[r[0]].append(r)
        parts = [by_t[t] for t in sorted(by_t)]
        if num_snapshots is not None and num_snapshots != len(parts):
            raise ConfigurationError(
                f"stream has {len(parts)} distinct timestamps, expected {num_snapshots}"
            )
        if not parts:
            raise ConfigurationError("edge stream is empty")

    label_ids: dict[str, int] = {}
    for _, _, u, v, _ in records:
        for x in (u, v):
            if x not in label_ids:
                label_ids[x] = len(label_ids)

    merged: list[dict[Edge, float]] = []
    for part in parts:
        acc: dict[Edge, float] = {}
        for _, _, u, v, w in part:
            key = edge_key(label_ids[u], label_ids[v])
            if weight_mode == "given":
                acc[key] = max(acc.get(key, w), w)
            else:
                acc[key] = acc.get(key, 0.0) + 1.0
        merged.append(acc)

    all_w = [w for acc in merged for w in acc.values()]
    if normalize and all_w:
        lo, hi = min(all_w), max(all_w)
        span = hi - lo
        for acc in merged:
            for key, w in acc.items():
                acc[key] = (w - lo) / span if span > 0 else 1.0
    elif all_w and not all(0.0 < w <= 1.0 for w in all_w):
        raise ConfigurationError("weights must lie in (0,1] when normalization is off")

    snapshots = [
        [(u, v, w) for (u, v), w in sorted(acc.items()) if w > 0.0] for acc in merged
    ]
    labels = [None] * len(label_ids)
    for label, i in label_ids.items():
        labels[i] = label
    return DynamicNetwork.from_edge_lists(snapshots, len(labels), labels)
