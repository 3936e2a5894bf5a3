"""Deduplicate repeated tree-node vertex sets into a shared table.

A node whose member set occurs ``f`` times across the whole index costs
``f * |X|`` slots plain and ``f + |X|`` slots once shared, so it is worth
replacing exactly when ``space_gain(|X|, f) > 0``.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .errors import DanglingReferenceError
from .wcf_index import ThetaForest, ThetaTreeNode, WcfIndex


@dataclass
class AuxiliaryTable:
    entries: dict[int, tuple[int, ...]] = field(default_factory=dict)
    by_content: dict[tuple[int, ...], int] = field(default_factory=dict)

    @classmethod
    def from_entries(cls, entries: dict[int, tuple[int, ...]]) -> AuxiliaryTable:
        entries = {int(r): tuple(sorted(vs)) for r, vs in entries.items()}
        if sorted(entries) != list(range(len(entries))):
            raise DanglingReferenceError("virtual ids must be dense from 0")
        return cls(entries, {vs: r for r, vs in entries.items()})

    def add(self, members: tuple[int, ...]) -> int:
        ref = self.by_content.get(members)
        if ref is None:
            ref = len(self.entries)
            self.entries[ref] = members
            self.by_content[members] = ref
        return ref

    def __len__(self) -> int:
        return len(self.entries)


def space_gain(node_size: int, frequency: int) -> int:
    if node_size < 1 or frequency < 1:
        raise ValueError("node size and frequency must be positive")
    return frequency * (node_size - 1) - node_size


def slot_count(idx: WcfIndex) -> int:
    return idx.slot_count()


def _copy_forest(f: ThetaForest, members) -> ThetaForest:
    nodes = [
        ThetaTreeNode(n.node_id, n.level, n.theta, vertices=members(n) if members else n.vertices,
                      virtual_ref=None if members else n.virtual_ref,
                      parent=n.parent, children=list(n.children))
        for n in f.nodes
    ]
    return ThetaForest(f.k, f.t, nodes, dict(f.locator))


def expand(idx: WcfIndex, aux: AuxiliaryTable | None = None) -> WcfIndex:
    """Plain copy of ``idx`` with every virtual reference resolved."""
    table = aux if aux is not None else idx.aux
    resolver = WcfIndex(idx.grid, idx.vertex_count, idx.num_snapshots, {}, idx.k_max, table)
    forests = {key: _copy_forest(f, resolver.node_vertices) for key, f in idx.forests.items()}
    return WcfIndex(idx.grid, idx.vertex_count, idx.num_snapshots, forests, list(idx.k_max), None)


def compress(idx: WcfIndex) -> tuple[WcfIndex, AuxiliaryTable]:
    """Replace every node set with positive global space gain by a shared reference."""
    plain = expand(idx) if idx.aux is not None else idx
    order = sorted(plain.forests, key=lambda kt: (kt[1], kt[0]))
    freq: Counter = Counter()
    for key in order:
        for n in plain.forests[key].nodes:
            freq[tuple(sorted(n.vertices))] += 1
    table = AuxiliaryTable()
    forests = {}
    for key in order:
        f = _copy_forest(plain.forests[key], None)
        for n in f.nodes:
            members = tuple(sorted(n.vertices))
            if space_gain(len(members), freq[members]) > 0:
                n.virtual_ref = table.add(members)
                n.vertices = None
        forests[key] = f
    out = WcfIndex(plain.grid, plain.vertex_count, plain.num_snapshots, forests,
                   list(plain.k_max), table if table.entries else None)
    return out, table
