"""Per-configuration shortest paths and destination-indexed forwarding tables.

Isolated links are skipped outright.  Nodes isolated in a configuration are
never used as transit hops, only as path endpoints.  Among equal-cost paths
the lexicographically smallest node sequence wins, which is also what hop by
hop forwarding through the tables produces.
"""

from __future__ import annotations

import csv
import heapq
import io
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping

from .configgen import Configuration, ConfigurationSet
from .errors import NoRoute, Unreachable, ZeroWeightOriginal
from .topology import Graph, Link


@dataclass(frozen=True)
class Path:
    nodes: tuple[int, ...]
    links: tuple[Link, ...]
    total_weight: int

    @property
    def hop_count(self) -> int:
        return len(self.links)


def distances_to(g: Graph, c: Configuration, dst: int) -> dict[int, int]:
    """Cost of the best path from every node to ``dst`` under ``c``.

    Nodes that cannot reach ``dst`` are absent.
    """
    dist = {dst: 0}
    heap = [(0, dst)]
    done = set()
    while heap:
        d, y = heapq.heappop(heap)
        if y in done:
            continue
        done.add(y)
        if y != dst and y in c.isolated_nodes:
            continue
        for x in g.neighbors(y):
            w = c.cost(x, y)
            if w is None:
                continue
            nd = d + w
            if nd < dist.get(x, nd + 1):
                dist[x] = nd
                heapq.heappush(heap, (nd, x))
    return dist


def _first_hop(g: Graph, c: Configuration, x: int, dst: int, dist: Mapping[int, int]) -> int:
    for y in g.neighbors(x):
        w = c.cost(x, y)
        if w is None or y not in dist:
            continue
        if y != dst and y in c.isolated_nodes:
            continue
        if w + dist[y] == dist[x]:
            return y
    raise Unreachable(f"no next hop from {x} to {dst}")  # pragma: no cover


def shortest_path(g: Graph, c: Configuration, u: int, v: int) -> Path:
    """Minimum-cost path from ``u`` to ``v`` in configuration ``c``.

    Raises:
        Unreachable: no usable path exists.
    """
    for x in (u, v):
        g.neighbors(x)  # raises UnknownNode
    dist = distances_to(g, c, v)
    if u not in dist:
        raise Unreachable(f"{v} unreachable from {u} in C_{c.index}")
    nodes = [u]
    links = []
    while nodes[-1] != v:
        x = nodes[-1]
        y = _first_hop(g, c, x, v, dist)
        links.append(Link(x, y, c.cost(x, y)))
        nodes.append(y)
    return Path(tuple(nodes), tuple(links), dist[u])


@dataclass(frozen=True)
class ForwardingTable:
    config_index: int
    entries: Mapping[tuple[int, int], int]

    def next_hop(self, at: int, dst: int) -> int:
        return next_hop(self, at, dst)

    def route(self, src: int, dst: int) -> list[int]:
        """Hop-by-hop walk through the table."""
        hops = [src]
        while hops[-1] != dst:
            hops.append(self.next_hop(hops[-1], dst))
            if len(hops) > len(self.entries) + 2:
                raise RuntimeError("forwarding loop")  # pragma: no cover
        return hops


def next_hop(t: ForwardingTable, at: int, dst: int) -> int:
    try:
        return t.entries[(at, dst)]
    except KeyError:
        raise NoRoute(f"C_{t.config_index} has no entry at {at} for {dst}") from None


def build_table(g: Graph, c: Configuration, allow_unreachable: bool = False) -> ForwardingTable:
    entries = {}
    for dst in g.nodes:
        dist = distances_to(g, c, dst)
        for x in g.nodes:
            if x == dst:
                continue
            if x not in dist:
                if allow_unreachable:
                    continue
                raise Unreachable(f"{dst} unreachable from {x} in C_{c.index}")
            entries[(x, dst)] = _first_hop(g, c, x, dst, dist)
    return ForwardingTable(c.index, MappingProxyType(dict(sorted(entries.items()))))


def build_tables(g: Graph, cs: ConfigurationSet, allow_unreachable: bool = False) -> list[ForwardingTable]:
    """One forwarding table per configuration, ``C_0`` first."""
    return [build_table(g, c, allow_unreachable) for c in cs]


def path_stretch(original: Path, backup: Path) -> Fraction:
    """Backup cost relative to the original path cost."""
    if (original.nodes[0], original.nodes[-1]) != (backup.nodes[0], backup.nodes[-1]):
        raise ValueError("paths must share endpoints")
    if original.total_weight == 0:
        raise ZeroWeightOriginal("original path has zero weight")
    return Fraction(backup.total_weight, original.total_weight)


def tables_to_csv(tables: Iterable[ForwardingTable]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["config_index", "at_node", "destination", "next_hop"])
    for t in tables:
        for (at, dst), nh in t.entries.items():
            writer.writerow([t.config_index, at, dst, nh])
    return buf.getvalue()
