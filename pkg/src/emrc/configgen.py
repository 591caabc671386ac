"""Backup configuration generation and validation.

A backup configuration keeps the topology but reweights links so that some
nodes and links carry no transit traffic:

* an *isolated* link is unusable (infinite weight, kept as a sentinel);
* a *restricted* link has the finite weight ``w_r``, larger than any path of
  normal links, so it is only ever used as the first or last hop to reach an
  isolated node.

Every node and every link is isolated in exactly one backup configuration,
and each configuration must stay valid: every ordered node pair keeps a
finite path that uses no isolated link and no isolated node as a transit hop.
"""

from __future__ import annotations

import enum
import json
import random
from collections import deque
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping

from .errors import DisconnectedBackbone, InsufficientConfigurations, NotBiconnected
from .topology import Graph, LinkKey, edge_key, is_biconnected


class WeightClass(enum.Enum):
    NORMAL = "normal"
    RESTRICTED = "restricted"
    ISOLATED = "isolated"


def restricted_weight(g: Graph) -> int:
    """``w_r``: one more than the sum of all normal link weights."""
    return 1 + sum(g.weights.values())


@dataclass(frozen=True, eq=False)
class Configuration:
    """One weight assignment over a graph.

    ``classes`` is keyed by directed link; ``isolated_links`` by undirected key.
    """

    index: int
    graph: Graph = field(repr=False)
    classes: Mapping[LinkKey, WeightClass] = field(repr=False)
    isolated_nodes: frozenset[int]
    isolated_links: frozenset[LinkKey]
    w_r: int = field(repr=False)

    @classmethod
    def build(
        cls,
        g: Graph,
        index: int,
        isolated_nodes: Iterable[int] = (),
        isolated_links: Iterable[LinkKey] = (),
        w_r: int | None = None,
    ) -> Configuration:
        """Derive link classes from isolated node and link sets.

        Links listed in ``isolated_links`` are isolated; remaining links that
        touch an isolated node are restricted; everything else is normal.
        """
        nodes = frozenset(isolated_nodes)
        links = frozenset(edge_key(*k) for k in isolated_links)
        classes = {}
        for u, v in g.weights:
            if edge_key(u, v) in links:
                classes[(u, v)] = WeightClass.ISOLATED
            elif u in nodes or v in nodes:
                classes[(u, v)] = WeightClass.RESTRICTED
            else:
                classes[(u, v)] = WeightClass.NORMAL
        return cls(
            index=index,
            graph=g,
            classes=MappingProxyType(classes),
            isolated_nodes=nodes,
            isolated_links=links,
            w_r=restricted_weight(g) if w_r is None else w_r,
        )

    @classmethod
    def normal(cls, g: Graph, w_r: int | None = None) -> Configuration:
        return cls.build(g, 0, w_r=w_r)

    def link_class(self, u: int, v: int) -> WeightClass:
        return self.classes[(u, v)]

    def cost(self, u: int, v: int) -> int | None:
        """Weight of ``(u, v)`` here; ``None`` for an isolated link."""
        cls = self.classes[(u, v)]
        if cls is WeightClass.NORMAL:
            return self.graph.weight(u, v)
        if cls is WeightClass.RESTRICTED:
            return self.w_r
        return None

    def isolates_node(self, u: int) -> bool:
        return u in self.isolated_nodes

    def isolates_link(self, u: int, v: int) -> bool:
        return edge_key(u, v) in self.isolated_links

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Configuration):
            return NotImplemented
        return (
            self.index == other.index
            and self.w_r == other.w_r
            and self.isolated_nodes == other.isolated_nodes
            and self.isolated_links == other.isolated_links
            and dict(self.classes) == dict(other.classes)
            and self.graph == other.graph
        )

    def __hash__(self) -> int:
        return hash((self.index, self.isolated_nodes, self.isolated_links))


@dataclass(frozen=True)
class ConfigurationSet:
    configs: tuple[Configuration, ...]
    w_r: int

    @property
    def n(self) -> int:
        """Number of backup configurations (``C_0`` excluded)."""
        return len(self.configs) - 1

    @property
    def graph(self) -> Graph:
        return self.configs[0].graph

    def __getitem__(self, i: int) -> Configuration:
        return self.configs[i]

    def __len__(self) -> int:
        return len(self.configs)

    def __iter__(self):
        return iter(self.configs)

    def backups(self) -> tuple[Configuration, ...]:
        return self.configs[1:]


# -- validity ------------------------------------------------------------------


@dataclass(frozen=True)
class ValidityReport:
    valid: bool
    violations: tuple[tuple[int, int], ...] = ()


def is_valid_config(g: Graph, c: Configuration) -> ValidityReport:
    """Check that every ordered pair keeps a finite path avoiding isolated transit.

    Isolated nodes may still be path endpoints.
    """
    violations = []
    for src in g.nodes:
        seen = {src}
        queue = deque([src])
        while queue:
            x = queue.popleft()
            if x != src and x in c.isolated_nodes:
                continue
            for y in g.neighbors(x):
                if y not in seen and c.classes[(x, y)] is not WeightClass.ISOLATED:
                    seen.add(y)
                    queue.append(y)
        violations.extend((src, dst) for dst in g.nodes if dst not in seen)
    return ValidityReport(not violations, tuple(violations))


def check_invariants(c: Configuration) -> list[str]:
    """Structural problems with ``c`` beyond path validity; empty when well-formed."""
    g = c.graph
    problems = []
    for (u, v), cls in c.classes.items():
        if cls is not WeightClass.NORMAL and c.classes[(v, u)] is not cls:
            problems.append(f"link ({u},{v}) is {cls.value} in one direction only")
        touches = u in c.isolated_nodes or v in c.isolated_nodes
        if cls is WeightClass.NORMAL and touches:
            problems.append(f"link ({u},{v}) touches an isolated node but is normal")
        if cls is WeightClass.RESTRICTED and not touches:
            problems.append(f"link ({u},{v}) is restricted but touches no isolated node")
        if cls is WeightClass.RESTRICTED and u in c.isolated_nodes and v in c.isolated_nodes:
            problems.append(f"link ({u},{v}) joins two isolated nodes but is not isolated")
    if c.index == 0 and (c.isolated_nodes or c.isolated_links):
        problems.append("C_0 must not isolate anything")
    for u in sorted(c.isolated_nodes):
        if not any(c.classes[(u, v)] is WeightClass.RESTRICTED for v in g.neighbors(u)):
            problems.append(f"isolated node {u} has no restricted link")
    return problems


@dataclass(frozen=True)
class CoverageReport:
    node_configs: Mapping[int, tuple[int, ...]]
    link_configs: Mapping[LinkKey, tuple[int, ...]]

    @property
    def uncovered_nodes(self) -> list[int]:
        return [u for u, cs in self.node_configs.items() if not cs]

    @property
    def uncovered_links(self) -> list[LinkKey]:
        return [k for k, cs in self.link_configs.items() if not cs]

    @property
    def duplicate_nodes(self) -> list[int]:
        return [u for u, cs in self.node_configs.items() if len(cs) > 1]

    @property
    def duplicate_links(self) -> list[LinkKey]:
        return [k for k, cs in self.link_configs.items() if len(cs) > 1]

    @property
    def ok(self) -> bool:
        return not (
            self.uncovered_nodes or self.uncovered_links or self.duplicate_nodes or self.duplicate_links
        )


def coverage_report(cs: ConfigurationSet, g: Graph) -> CoverageReport:
    """Which backup configurations isolate each node and each link."""
    nodes: dict[int, list[int]] = {u: [] for u in g.nodes}
    links: dict[LinkKey, list[int]] = {k: [] for k in g.edges}
    for c in cs.backups():
        for u in c.isolated_nodes:
            nodes[u].append(c.index)
        for k in c.isolated_links:
            links[k].append(c.index)
    return CoverageReport(
        MappingProxyType({u: tuple(v) for u, v in nodes.items()}),
        MappingProxyType({k: tuple(v) for k, v in links.items()}),
    )


@dataclass(frozen=True)
class Backbone:
    nodes: frozenset[int]
    links: frozenset[LinkKey]


def backbone(c: Configuration) -> Backbone:
    """Non-isolated nodes and the normal links between them.

    Raises:
        DisconnectedBackbone: if that subgraph is not connected.
    """
    nodes = frozenset(u for u in c.graph.nodes if u not in c.isolated_nodes)
    links = frozenset(
        edge_key(u, v) for (u, v), cls in c.classes.items() if cls is WeightClass.NORMAL
    )
    if not _connected(nodes, links):
        raise DisconnectedBackbone(f"backbone of C_{c.index} is not connected")
    return Backbone(nodes, links)


def _connected(nodes: frozenset[int] | set[int], links: Iterable[LinkKey]) -> bool:
    if not nodes:
        return True
    adj: dict[int, list[int]] = {u: [] for u in nodes}
    for u, v in links:
        if u in adj and v in adj:
            adj[u].append(v)
            adj[v].append(u)
    start = min(nodes)
    seen = {start}
    stack = [start]
    while stack:
        for y in adj[stack.pop()]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == len(nodes)


# -- generation ----------------------------------------------------------------


class _Builder:
    """Greedy round-robin isolation state for ``n`` backup configurations."""

    def __init__(self, g: Graph, n: int):
        self.g = g
        self.n = n
        self.isolated = [set() for _ in range(n + 1)]
        self.iso_links: list[set[LinkKey]] = [set() for _ in range(n + 1)]
        self.home: dict[LinkKey, int] = {}

    def _restricted_count(self, x: int, nodes: set[int], links: set[LinkKey]) -> int:
        return sum(1 for y in self.g.neighbors(x) if y not in nodes and edge_key(x, y) not in links)

    def _ok(self, ci: int, nodes: set[int], links: set[LinkKey]) -> bool:
        if any(self._restricted_count(x, nodes, links) == 0 for x in nodes):
            return False
        backbone_nodes = {u for u in self.g.nodes if u not in nodes}
        backbone_links = (k for k in self.g.edges if k not in links)
        return _connected(backbone_nodes, backbone_links)

    def try_node(self, ci: int, u: int) -> bool:
        nodes = self.isolated[ci] | {u}
        forced = {edge_key(u, v) for v in self.g.neighbors(u) if v in self.isolated[ci]}
        if any(self.home.get(k, ci) != ci for k in forced):
            return False
        links = self.iso_links[ci] | forced
        extras = [
            edge_key(u, v)
            for v in self.g.neighbors(u)
            if v not in nodes and edge_key(u, v) not in self.home and edge_key(u, v) not in links
        ]
        for extra in [*extras, None]:
            trial = links | {extra} if extra is not None else links
            if self._ok(ci, nodes, trial):
                self.isolated[ci] = nodes
                self.iso_links[ci] = trial
                for k in trial:
                    self.home.setdefault(k, ci)
                return True
        return False

    def try_link(self, ci: int, key: LinkKey) -> bool:
        links = self.iso_links[ci] | {key}
        if self._ok(ci, self.isolated[ci], links):
            self.iso_links[ci] = links
            self.home[key] = ci
            return True
        return False

    def _movable(self, ci: int, key: LinkKey) -> bool:
        u, v = key
        return not (u in self.isolated[ci] and v in self.isolated[ci])

    def place_link(self, key: LinkKey, start: int, depth: int, seen: frozenset = frozenset()) -> int | None:
        """Isolate ``key`` somewhere, displacing up to ``depth`` other links.

        Returns the configuration index used, or ``None``.
        """
        order = [(start + step) % self.n + 1 for step in range(self.n)]
        for ci in order:
            if self.try_link(ci, key):
                return ci
        if depth == 0:
            return None
        seen = seen | {key}
        for ci in order:
            for other in sorted(self.iso_links[ci]):
                if other in seen or not self._movable(ci, other):
                    continue
                links = (self.iso_links[ci] - {other}) | {key}
                if not self._ok(ci, self.isolated[ci], links):
                    continue
                before = self.iso_links[ci]
                self.iso_links[ci] = links
                self.home[key] = ci
                del self.home[other]
                if self.place_link(other, start, depth - 1, seen) is not None:
                    return ci
                self.iso_links[ci] = before
                self.home[other] = ci
                del self.home[key]
        return None

    def result(self, w_r: int) -> ConfigurationSet:
        configs = [Configuration.normal(self.g, w_r)]
        for i in range(1, self.n + 1):
            configs.append(Configuration.build(self.g, i, self.isolated[i], self.iso_links[i], w_r))
        return ConfigurationSet(tuple(configs), w_r)


# how many already-placed links one uncovered link may displace
_SWAP_DEPTH = 3


def _node_order(g: Graph, seed: int | None) -> list[int]:
    if seed is None:
        return sorted(g.nodes, key=lambda u: (-g.degree(u), u))
    rng = random.Random(seed)
    jitter = {u: rng.random() for u in g.nodes}
    return sorted(g.nodes, key=lambda u: (-g.degree(u), jitter[u]))


def _greedy(g: Graph, n: int, seed: int | None) -> ConfigurationSet:
    b = _Builder(g, n)
    nxt = 0
    for u in _node_order(g, seed):
        for step in range(n):
            ci = (nxt + step) % n + 1
            if b.try_node(ci, u):
                nxt = ci % n
                break
        else:
            raise InsufficientConfigurations(n, f"node {u}")
    for key in g.edges:
        if key in b.home:
            continue
        ci = b.place_link(key, nxt, _SWAP_DEPTH)
        if ci is None:
            raise InsufficientConfigurations(n, f"link {key[0]}-{key[1]}")
        nxt = ci % n
    cs = b.result(restricted_weight(g))
    for c in cs:
        report = is_valid_config(g, c)
        if not report.valid or check_invariants(c):
            raise RuntimeError(f"generator produced an invalid C_{c.index}: {report.violations}")
    if not coverage_report(cs, g).ok:
        raise RuntimeError("generator produced an incomplete cover")
    return cs


def _pad(cs: ConfigurationSet, n: int) -> ConfigurationSet:
    g = cs.graph
    extra = tuple(Configuration.build(g, i, w_r=cs.w_r) for i in range(cs.n + 1, n + 1))
    return ConfigurationSet(cs.configs + extra, cs.w_r)


def generate_configs(g: Graph, n: int | str = "auto", seed: int | None = None) -> ConfigurationSet:
    """Generate ``C_0`` plus ``n`` backup configurations covering every node and link.

    Nodes are visited by descending degree (lowest id first on ties) and
    each is isolated in the first configuration, in rotating order, whose
    backbone stays connected without it.  Along with a node, one of its
    links not yet isolated elsewhere is isolated when that keeps the
    configuration valid.  Links still uncovered afterwards are placed
    round-robin wherever they fit, moving a few previously placed links
    to other configurations when no configuration has room.

    If the greedy pass fails for ``n`` but succeeds for a smaller count,
    the set is padded with unused configurations, so success is monotone
    in ``n``.  ``n="auto"`` returns the smallest count the greedy pass
    accepts, up to the number of nodes.

    Raises:
        NotBiconnected: the topology cannot be protected.
        InsufficientConfigurations: some component cannot be isolated.
    """
    if not g.nodes or not is_biconnected(g):
        raise NotBiconnected("topology must be bi-connected")
    if n == "auto":
        first_error = None
        for k in range(1, len(g.nodes) + 1):
            try:
                return _greedy(g, k, seed)
            except InsufficientConfigurations as exc:
                first_error = first_error or exc
        raise InsufficientConfigurations(len(g.nodes), first_error.component if first_error else "?")
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"n must be a positive integer or 'auto', got {n!r}")
    try:
        return _greedy(g, n, seed)
    except InsufficientConfigurations as exc:
        for k in range(n - 1, 0, -1):
            try:
                return _pad(_greedy(g, k, seed), n)
            except InsufficientConfigurations:
                continue
        raise exc


# -- serialization -------------------------------------------------------------


def configset_to_dict(cs: ConfigurationSet) -> dict:
    out = []
    for c in cs:
        weights = []
        for (u, v), cls in sorted(c.classes.items()):
            weights.append({"from": u, "to": v, "class": cls.value, "weight": c.cost(u, v)})
        out.append(
            {
                "index": c.index,
                "isolated_nodes": sorted(c.isolated_nodes),
                "isolated_links": [list(k) for k in sorted(c.isolated_links)],
                "weights": weights,
            }
        )
    return {"n": cs.n, "w_r": cs.w_r, "configurations": out}


def configset_to_json(cs: ConfigurationSet) -> str:
    return json.dumps(configset_to_dict(cs), indent=2)


def configset_from_json(text: str, g: Graph) -> ConfigurationSet:
    doc = json.loads(text)
    w_r = int(doc["w_r"])
    configs = []
    for item in doc["configurations"]:
        classes = {(w["from"], w["to"]): WeightClass(w["class"]) for w in item["weights"]}
        if set(classes) != set(g.weights):
            raise ValueError(f"configuration {item['index']} does not cover the topology links")
        configs.append(
            Configuration(
                index=int(item["index"]),
                graph=g,
                classes=MappingProxyType(dict(sorted(classes.items()))),
                isolated_nodes=frozenset(item["isolated_nodes"]),
                isolated_links=frozenset(edge_key(*k) for k in item["isolated_links"]),
                w_r=w_r,
            )
        )
    return ConfigurationSet(tuple(configs), w_r)
