"""Network topology graph: parsing, serialization and structural checks.

A topology is a set of integer node ids joined by directed links, each
carrying a positive integer routing weight.  Links always come in
``(u, v)``/``(v, u)`` pairs; the two directions may carry different weights.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

from .errors import AsymmetricLink, ParseError, UnknownNode

LinkKey = tuple[int, int]


def edge_key(u: int, v: int) -> LinkKey:
    """Undirected key for the link pair between ``u`` and ``v``."""
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True, order=True)
class Link:
    u: int
    v: int
    weight: int

    @property
    def key(self) -> LinkKey:
        return edge_key(self.u, self.v)


class Graph:
    """Immutable directed graph with symmetric link pairs.

    Args:
        nodes: node ids; stored sorted.
        weights: mapping ``(u, v) -> weight`` for every directed link.
    """

    __slots__ = ("nodes", "weights", "_adj")

    def __init__(self, nodes: Iterable[int], weights: Mapping[LinkKey, int]):
        node_tuple = tuple(sorted(set(nodes)))
        node_set = set(node_tuple)
        adj: dict[int, list[int]] = {u: [] for u in node_tuple}
        clean: dict[LinkKey, int] = {}
        for (u, v), w in sorted(weights.items()):
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            if u not in node_set or v not in node_set:
                raise UnknownNode(f"link ({u},{v}) references an unknown node")
            if not isinstance(w, int) or isinstance(w, bool) or w < 1:
                raise ValueError(f"link ({u},{v}) has non-positive or non-integer weight {w!r}")
            if (v, u) not in weights:
                raise ValueError(f"link ({u},{v}) has no reverse link")
            clean[(u, v)] = w
            adj[u].append(v)
        object.__setattr__(self, "nodes", node_tuple)
        object.__setattr__(self, "weights", MappingProxyType(clean))
        object.__setattr__(
            self, "_adj", MappingProxyType({u: tuple(sorted(vs)) for u, vs in adj.items()})
        )

    def __setattr__(self, name, value):
        raise AttributeError("Graph is immutable")

    def __repr__(self) -> str:
        return f"Graph(nodes={list(self.nodes)}, links={len(self.weights)})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.nodes == other.nodes and dict(self.weights) == dict(other.weights)

    def __hash__(self) -> int:
        return hash((self.nodes, tuple(sorted(self.weights.items()))))

    @property
    def links(self) -> tuple[Link, ...]:
        return tuple(Link(u, v, w) for (u, v), w in self.weights.items())

    @property
    def edges(self) -> tuple[LinkKey, ...]:
        """Undirected link keys ``(min, max)``, sorted."""
        return tuple(sorted({edge_key(u, v) for u, v in self.weights}))

    @property
    def w_max(self) -> int:
        return max(self.weights.values(), default=0)

    def neighbors(self, u: int) -> tuple[int, ...]:
        try:
            return self._adj[u]
        except KeyError:
            raise UnknownNode(f"node {u} is not in the graph") from None

    def degree(self, u: int) -> int:
        return len(self.neighbors(u))

    def weight(self, u: int, v: int) -> int:
        return self.weights[(u, v)]

    def has_node(self, u: int) -> bool:
        return u in self._adj

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self.weights

    def is_symmetric(self) -> bool:
        return all(self.weights[(v, u)] == w for (u, v), w in self.weights.items())

    def without(self, nodes: Iterable[int] = (), edges: Iterable[LinkKey] = ()) -> Graph:
        """Copy of the graph with the given nodes (and their links) and undirected links removed."""
        gone = set(nodes)
        cut = {edge_key(*e) for e in edges}
        return Graph(
            [u for u in self.nodes if u not in gone],
            {
                (u, v): w
                for (u, v), w in self.weights.items()
                if u not in gone and v not in gone and edge_key(u, v) not in cut
            },
        )


def adjacency(g: Graph, u: int) -> frozenset[Link]:
    """The set of links leaving ``u``."""
    return frozenset(Link(u, v, g.weight(u, v)) for v in g.neighbors(u))


def is_connected(g: Graph) -> bool:
    if not g.nodes:
        return True
    seen = {g.nodes[0]}
    stack = [g.nodes[0]]
    while stack:
        u = stack.pop()
        for v in g.neighbors(u):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == len(g.nodes)


def articulation_points(g: Graph) -> list[int]:
    """Articulation points of the undirected view (iterative Hopcroft-Tarjan)."""
    disc: dict[int, int] = {}
    low: dict[int, int] = {}
    points: set[int] = set()
    counter = 0
    for root in g.nodes:
        if root in disc:
            continue
        disc[root] = low[root] = counter
        counter += 1
        root_children = 0
        stack: list[tuple[int, int | None, Iterator[int]]] = [(root, None, iter(g.neighbors(root)))]
        while stack:
            u, parent, it = stack[-1]
            advanced = False
            for v in it:
                if v == parent:
                    continue
                if v in disc:
                    low[u] = min(low[u], disc[v])
                else:
                    disc[v] = low[v] = counter
                    counter += 1
                    stack.append((v, u, iter(g.neighbors(v))))
                    advanced = True
                    break
            if advanced:
                continue
            stack.pop()
            if parent is None:
                continue
            low[parent] = min(low[parent], low[u])
            if parent == root:
                root_children += 1
            elif low[u] >= disc[parent]:
                points.add(parent)
        if root_children > 1:
            points.add(root)
    return sorted(points)


def is_biconnected(g: Graph) -> bool:
    """True iff ``g`` is connected and has no articulation point."""
    if not g.nodes:
        raise ValueError("empty graph")
    return is_connected(g) and not articulation_points(g)


# -- parsing -----------------------------------------------------------------


def _int_token(tok: str, line: int, what: str) -> int:
    try:
        value = int(tok)
    except ValueError:
        raise ParseError(line, f"{what} {tok!r} is not an integer") from None
    return value


def _build(
    declared: list[tuple[int, int]],
    links: list[tuple[int, int, int, int]],
    directed: bool,
) -> Graph:
    node_ids: dict[int, int] = {}
    for line, nid in declared:
        if nid < 0:
            raise ParseError(line, f"negative node id {nid}")
        if nid in node_ids:
            raise ParseError(line, f"duplicate node {nid}")
        node_ids[nid] = line

    explicit: dict[LinkKey, tuple[int, int]] = {}
    for line, u, v, w in links:
        if u == v:
            raise ParseError(line, f"self-loop on node {u}")
        for x in (u, v):
            if x not in node_ids:
                raise ParseError(line, f"link references undeclared node {x}")
        if w < 1:
            raise ParseError(line, f"non-positive weight {w}")
        if (u, v) in explicit:
            raise ParseError(line, f"duplicate link {u} {v}")
        explicit[(u, v)] = (w, line)

    weights = {k: w for k, (w, _) in explicit.items()}
    for (u, v), (w, line) in explicit.items():
        if (v, u) not in explicit:
            if directed:
                raise AsymmetricLink(line, f"link {u} {v} has no reverse link {v} {u}")
            weights[(v, u)] = w

    ids = sorted(node_ids)
    if ids != list(range(len(ids))):
        raise ParseError(0, f"node ids must form the range 0..{len(ids) - 1}, got {ids}")
    return Graph(ids, weights)


def _parse_json(text: str, directed: bool) -> Graph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, f"invalid JSON: {exc.msg}") from None
    if not isinstance(doc, dict) or "nodes" not in doc or "links" not in doc:
        raise ParseError(1, "JSON topology needs 'nodes' and 'links' arrays")
    directed = bool(doc.get("directed", directed))
    declared = []
    for item in doc["nodes"]:
        nid = item["id"] if isinstance(item, dict) else item
        if not isinstance(nid, int):
            raise ParseError(0, f"node id {nid!r} is not an integer")
        declared.append((0, nid))
    links = []
    for item in doc["links"]:
        if isinstance(item, dict):
            u, v, w = item.get("from", item.get("u")), item.get("to", item.get("v")), item.get("weight", 1)
        else:
            u, v, w = (list(item) + [1])[:3]
        if not all(isinstance(x, int) for x in (u, v, w)):
            raise ParseError(0, f"link {item!r} has non-integer fields")
        links.append((0, u, v, w))
    return _build(declared, links, directed)


def parse_topology(text: str, directed: bool = False) -> Graph:
    """Parse a topology from the line format or its JSON equivalent.

    Line format::

        # comment
        node 0
        node 1
        link 0 1 5

    ``link u v w`` also creates ``v u w`` unless ``directed`` is set or the
    reverse direction is listed explicitly with its own weight.
    """
    if text.lstrip().startswith("{"):
        return _parse_json(text, directed)

    declared: list[tuple[int, int]] = []
    links: list[tuple[int, int, int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        kind = tokens[0].lower()
        if kind == "node":
            if len(tokens) != 2:
                raise ParseError(lineno, "expected 'node <id>'")
            declared.append((lineno, _int_token(tokens[1], lineno, "node id")))
        elif kind == "link":
            if len(tokens) != 4:
                raise ParseError(lineno, "expected 'link <u> <v> <weight>'")
            u, v, w = (_int_token(t, lineno, name) for t, name in zip(tokens[1:], ("u", "v", "weight")))
            links.append((lineno, u, v, w))
        else:
            raise ParseError(lineno, f"unknown directive {tokens[0]!r}")
    return _build(declared, links, directed)


def load_topology(path, directed: bool = False) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return parse_topology(fh.read(), directed=directed)


def to_text(g: Graph) -> str:
    """Serialize in the line format; re-parses (mirroring on) to an equal graph."""
    out = [f"node {u}" for u in g.nodes]
    for u, v in g.edges:
        w_uv, w_vu = g.weight(u, v), g.weight(v, u)
        out.append(f"link {u} {v} {w_uv}")
        if w_vu != w_uv:
            out.append(f"link {v} {u} {w_vu}")
    return "\n".join(out) + "\n"


def to_json(g: Graph) -> str:
    doc = {
        "nodes": list(g.nodes),
        "links": [{"from": u, "to": v, "weight": w} for (u, v), w in g.weights.items()],
        "directed": True,
    }
    return json.dumps(doc, indent=2)


def from_edges(edges: Iterable[tuple[int, int] | tuple[int, int, int]], nodes: Iterable[int] | None = None) -> Graph:
    """Build a symmetric graph from undirected ``(u, v[, w])`` tuples."""
    weights: dict[LinkKey, int] = {}
    seen: set[int] = set()
    for e in edges:
        u, v = e[0], e[1]
        w = e[2] if len(e) > 2 else 1
        weights[(u, v)] = weights[(v, u)] = w
        seen.update((u, v))
    return Graph(seen if nodes is None else nodes, weights)
