"""Exhaustive re-check of a configuration set, independent of the generator.

Everything here works on raw data (link class names, node and link sets)
and re-derives paths by simple-path enumeration.  It imports nothing from
``configgen`` so a bug there cannot hide itself here.  Intended for small
graphs (up to about a dozen nodes).
"""

from __future__ import annotations

from .topology import Graph


def _ukey(u, v):
    return (min(u, v), max(u, v))


def _has_valid_path(g: Graph, classes: dict, isolated: set, src: int, dst: int) -> bool:
    """Depth-first enumeration of simple paths src -> dst."""
    if src == dst:
        return True
    on_path = {src}

    def walk(x):
        for y in g.neighbors(x):
            if y in on_path or classes[(x, y)] == "isolated":
                continue
            if y == dst:
                return True
            if y in isolated:
                continue
            on_path.add(y)
            if walk(y):
                return True
            on_path.discard(y)
        return False

    return walk(src)


def oracle_problems(g: Graph, cs) -> list[str]:
    """Every reason ``cs`` fails to be a valid, exactly-once cover of ``g``."""
    problems: list[str] = []
    configs = list(cs.configs)
    if len(configs) < 2:
        problems.append("no backup configurations")
    node_hits = {u: 0 for u in g.nodes}
    link_hits = {_ukey(u, v): 0 for (u, v) in g.weights}

    for pos, c in enumerate(configs):
        classes = {k: cls.value for k, cls in c.classes.items()}
        isolated = set(c.isolated_nodes)
        iso_links = set(c.isolated_links)
        tag = f"C_{pos}"
        if c.index != pos:
            problems.append(f"{tag}: index {c.index} out of order")
        if set(classes) != set(g.weights):
            problems.append(f"{tag}: link set differs from topology")
            continue
        if pos == 0:
            if isolated or iso_links or any(v != "normal" for v in classes.values()):
                problems.append(f"{tag}: normal configuration isolates something")
            continue
        for (u, v), cls in classes.items():
            if cls not in ("normal", "restricted", "isolated"):
                problems.append(f"{tag}: unknown class {cls!r}")
            if cls != "normal" and classes[(v, u)] != cls:
                problems.append(f"{tag}: ({u},{v}) asymmetric {cls}")
            if (cls == "isolated") != (_ukey(u, v) in iso_links):
                problems.append(f"{tag}: ({u},{v}) class disagrees with isolated link list")
            at_u, at_v = u in isolated, v in isolated
            if (at_u or at_v) and cls == "normal":
                problems.append(f"{tag}: ({u},{v}) touches isolated node yet normal")
            if cls == "restricted" and not (at_u or at_v):
                problems.append(f"{tag}: ({u},{v}) restricted without isolated endpoint")
            if cls == "restricted" and at_u and at_v:
                problems.append(f"{tag}: ({u},{v}) restricted between isolated nodes")
        if not (c.w_r > 0 and isinstance(c.w_r, int)):
            problems.append(f"{tag}: restricted weight is not a positive integer")
        for u in isolated:
            if u not in node_hits:
                problems.append(f"{tag}: isolates unknown node {u}")
                continue
            node_hits[u] += 1
            if not any(classes[(u, v)] == "restricted" for v in g.neighbors(u)):
                problems.append(f"{tag}: isolated node {u} unreachable (no restricted link)")
        for k in iso_links:
            if k in link_hits:
                link_hits[k] += 1
        for s in g.nodes:
            for d in g.nodes:
                if not _has_valid_path(g, classes, isolated, s, d):
                    problems.append(f"{tag}: no valid path {s}->{d}")

    for u, hits in node_hits.items():
        if hits != 1:
            problems.append(f"node {u} isolated {hits} times")
    for k, hits in link_hits.items():
        if hits != 1:
            problems.append(f"link {k[0]}-{k[1]} isolated {hits} times")
    return problems


def oracle_validate(g: Graph, cs) -> bool:
    return not oracle_problems(g, cs)
