"""Small reference topologies and scenarios used by tests, docs and the CLI.

``figure3_graph`` is the 8-node comparison topology: traffic from node 1 to
node 0 normally follows 1-4-5-0; with node 5 isolated it follows 1-4-7-0.
Only those two routes matter, so the remaining links (through nodes 2, 3 and 6) were chosen to keep the graph
bi-connected without creating competing routes.
"""

from __future__ import annotations

from .forwarding import FailedComponent, Timers
from .simcore import FailureSpec, Flow, Scenario
from .topology import Graph, from_edges

FIGURE3_EDGES = [
    (0, 5), (4, 5), (1, 4), (0, 7), (4, 7),
    (1, 2), (2, 3), (3, 6), (0, 6), (5, 6),
]  # fmt: skip
BACKUP_LEGS = {(4, 7), (0, 7)}


def figure3_graph(backup_weight: int = 1) -> Graph:
    """The 8-node example; ``backup_weight`` sets links 4-7 and 7-0."""
    return from_edges([(u, v, backup_weight if (u, v) in BACKUP_LEGS else 1) for u, v in FIGURE3_EDGES])


def ring(n: int) -> Graph:
    return from_edges([(i, (i + 1) % n) for i in range(n)])


def complete(n: int) -> Graph:
    return from_edges([(a, b) for a in range(n) for b in range(a + 1, n)])


def path_graph(n: int) -> Graph:
    return from_edges([(i, i + 1) for i in range(n - 1)])


def figure3_scenario(
    down_at: int = 100_000,
    up_at: int | None = 400_000,
    backup_weight: int = 2,
    mode: str = "emrc",
    count: int = 1_000,
    interval: int = 1_000,
    timers: Timers = Timers(),
) -> Scenario:
    """One 1->0 flow across a node-5 outage."""
    return Scenario(
        topology=figure3_graph(backup_weight),
        flows=(Flow(1, 0, interval, count),),
        failures=(FailureSpec(FailedComponent.node(5), down_at, up_at),),
        mode=mode,
        timers=timers,
    )
