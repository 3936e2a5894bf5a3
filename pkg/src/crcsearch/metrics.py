"""Per-snapshot quality measures of a community over its interval."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .coredec import core_decompose
from .dyngraph import DynamicNetwork
from .errors import DensityUndefinedError, ParameterError
from .reliability import Community


@dataclass
class SnapshotQuality:
    t: int
    size: int
    density: float
    avg_core: float
    conductance: float


@dataclass
class QualityReport:
    ass: float
    asd: float
    ascore: float
    ascond: float
    per_snapshot: list[SnapshotQuality] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def snapshot_quality(net: DynamicNetwork, members: frozenset[int], t: int) -> SnapshotQuality:
    n = len(members)
    if n < 2:
        raise DensityUndefinedError("density needs at least two community members")
    g = net[t]
    inner = {v: {u for u in g.neighbors(v) if u in members} for v in members}
    m = sum(len(nb) for nb in inner.values()) // 2
    cores = core_decompose(inner)
    cut = sum(1 for v in members for u in g.neighbors(v) if u not in members)
    vol_in = sum(g.degree(v) for v in members)
    vol_out = 2 * g.edge_count - vol_in
    low = min(vol_in, vol_out)
    return SnapshotQuality(
        t=t,
        size=n,
        density=2.0 * m / (n * (n - 1)),
        avg_core=sum(cores.values()) / n,
        conductance=cut / low if low > 0 else 0.0,
    )


def evaluate(net: DynamicNetwork, community: Community) -> QualityReport:
    a, b = community.interval
    if not 0 <= a <= b < net.num_snapshots:
        raise ParameterError(f"interval {community.interval} outside the network")
    rows = [snapshot_quality(net, community.vertices, t) for t in range(a, b + 1)]

    def mean(xs):
        xs = list(xs)
        return sum(xs) / len(xs)

    return QualityReport(
        ass=mean(r.size for r in rows),
        asd=mean(r.density for r in rows),
        ascore=mean(r.avg_core for r in rows),
        ascond=mean(r.conductance for r in rows),
        per_snapshot=rows,
    )
