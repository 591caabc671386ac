"""IP fast reroute with multiple routing configurations, plus the EMRC timeslot and revert extension."""

from __future__ import annotations

__version__ = "0.1.0"

from .configgen import ConfigurationSet, generate_configs
from .forwarding import FailedComponent, Timers
from .simcore import Scenario, run, run_comparison
from .topology import Graph, parse_topology

__all__ = [
    "ConfigurationSet",
    "FailedComponent",
    "Graph",
    "Scenario",
    "Timers",
    "generate_configs",
    "parse_topology",
    "run",
    "run_comparison",
]
