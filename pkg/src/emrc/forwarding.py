"""Per-router forwarding state machine for failure handling.

When a router finds the next hop of a packet unreachable it is the
*detecting node* for that failure.  In ``emrc`` mode it first holds the
affected traffic for a timeslot; if the component is still down when the
timeslot ends it marks packets with the backup configuration that isolates
the component, forwards them there, and probes periodically until the
component answers, at which point the original routes are used again.  A
failure that outlives the re-convergence threshold triggers a global
recomputation instead.  ``mrc`` mode switches to the backup configuration
at once and keeps it until re-convergence.

All transitions are pure: they take a ``RouterState`` and return a new one.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Mapping, Sequence, Union

from .configgen import ConfigurationSet
from .errors import NoBackupConfig
from .routing import ForwardingTable
from .topology import edge_key

EMRC = "emrc"
MRC = "mrc"
MODES = (EMRC, MRC)


@dataclass(frozen=True, order=True)
class FailedComponent:
    """A failed node ``(v,)`` or an undirected link ``(u, v)``."""

    kind: str
    ids: tuple[int, ...]

    @classmethod
    def node(cls, v: int) -> FailedComponent:
        return cls("node", (v,))

    @classmethod
    def link(cls, u: int, v: int) -> FailedComponent:
        if u == v:
            raise ValueError("a link needs two distinct endpoints")
        return cls("link", edge_key(u, v))

    @classmethod
    def parse(cls, text: str) -> FailedComponent:
        """Parse ``"node 5"`` or ``"link 1-2"`` (also ``"link 1 2"``)."""
        kind, _, rest = text.strip().partition(" ")
        ids = [int(t) for t in rest.replace("-", " ").split()]
        if kind == "node" and len(ids) == 1:
            return cls.node(ids[0])
        if kind == "link" and len(ids) == 2:
            return cls.link(*ids)
        raise ValueError(f"cannot parse component {text!r}")

    @property
    def is_node(self) -> bool:
        return self.kind == "node"

    def blocks(self, x: int, y: int) -> bool:
        """True if this failure makes the hop ``x -> y`` unusable."""
        if self.is_node:
            return y == self.ids[0] or x == self.ids[0]
        return edge_key(x, y) == self.ids

    def __str__(self) -> str:
        if self.is_node:
            return f"node {self.ids[0]}"
        return f"link {self.ids[0]}-{self.ids[1]}"


@dataclass(frozen=True)
class Timers:
    """Timer values in simulation ticks (microseconds)."""

    t_slot: int = 30_000
    t_probe: int = 20_000
    t_reconv: int = 1_000_000

    def __post_init__(self):
        if min(self.t_slot, self.t_probe, self.t_reconv) <= 0:
            raise ValueError("timers must be positive")
        if self.t_slot >= self.t_reconv:
            raise ValueError("t_slot must be shorter than t_reconv")


# -- router modes (absence of an entry means Normal) -------------------------


@dataclass(frozen=True)
class TimeslotWait:
    detected_at: int
    deadline: int


@dataclass(frozen=True)
class BackupActive:
    detected_at: int
    config_index: int | None
    next_probe_at: int | None


@dataclass(frozen=True)
class Reconverged:
    at: int


Mode = Union[TimeslotWait, BackupActive, Reconverged]


def mode_name(mode: Mode | None) -> str:
    if mode is None:
        return "Normal"
    return type(mode).__name__


@dataclass(frozen=True)
class RouterState:
    node: int
    protocol: str = EMRC
    timers: Timers = Timers()
    modes: Mapping[FailedComponent, Mode] = field(default_factory=lambda: MappingProxyType({}))

    def __post_init__(self):
        if self.protocol not in MODES:
            raise ValueError(f"unknown protocol mode {self.protocol!r}")

    def mode(self, fc: FailedComponent) -> Mode | None:
        return self.modes.get(fc)

    def with_mode(self, fc: FailedComponent, mode: Mode | None) -> RouterState:
        modes = dict(self.modes)
        if mode is None:
            modes.pop(fc, None)
        else:
            modes[fc] = mode
        return replace(self, modes=MappingProxyType(modes))

    def blocking(self, nxt: int) -> FailedComponent | None:
        """The detected, still-active failure that makes ``nxt`` unusable."""
        for fc in (FailedComponent.node(nxt), FailedComponent.link(self.node, nxt)):
            if isinstance(self.modes.get(fc), (TimeslotWait, BackupActive)):
                return fc
        return None


# -- packets and actions ---------------------------------------------------------


@dataclass
class Packet:
    """A simulated data packet.

    ``config_mark`` stands in for the DSCP bits that carry the configuration
    index.  ``tried_configs`` is simulator-side bookkeeping of every mark the
    packet has carried since the last re-convergence.
    """

    src: int
    dst: int
    seq: int
    config_mark: int = 0
    hops: list[tuple[int, int]] = field(default_factory=list)
    tried_configs: set[int] = field(default_factory=lambda: {0})


class DropReason(str, enum.Enum):
    LOOP_DETECTED = "LoopDetected"
    SECOND_FAILURE_SAME_CONFIG = "SecondFailureSameConfig"
    HOLD_OVERFLOW = "HoldOverflow"
    DESTINATION_DOWN = "DestinationDown"
    NO_BACKUP_CONFIG = "NoBackupConfig"
    NO_ROUTE = "NoRoute"
    SOURCE_DOWN = "SourceDown"
    COMPONENT_DOWN = "ComponentDown"


@dataclass(frozen=True)
class Forward:
    next: int
    mark: int


@dataclass(frozen=True)
class Hold:
    until: int
    component: FailedComponent


@dataclass(frozen=True)
class Drop:
    reason: DropReason


@dataclass(frozen=True)
class DeliverLocal:
    pass


ForwardAction = Union[Forward, Hold, Drop, DeliverLocal]


@dataclass(frozen=True)
class ReconvergenceRequest:
    component: FailedComponent
    node: int
    at: int
    degraded: bool = False


# -- operations ------------------------------------------------------------------


def select_backup_config(cs: ConfigurationSet, fc: FailedComponent) -> int:
    """Index of the backup configuration in which ``fc`` is isolated.

    Raises:
        NoBackupConfig: no configuration isolates the component.
    """
    for c in cs.backups():
        if fc.is_node and fc.ids[0] in c.isolated_nodes:
            return c.index
        if not fc.is_node and fc.ids in c.isolated_links:
            return c.index
    raise NoBackupConfig(f"no backup configuration isolates {fc}")


def _backup_index(cs: ConfigurationSet, fc: FailedComponent) -> int | None:
    try:
        return select_backup_config(cs, fc)
    except NoBackupConfig:
        return None


def _decide(
    state: RouterState,
    dst: int,
    mark: int,
    tried: frozenset[int],
    tables: Sequence[ForwardingTable],
    cs: ConfigurationSet,
    now: int,
    down_links: frozenset[int],
) -> ForwardAction:
    x = state.node
    if mark >= len(tables):
        return Drop(DropReason.NO_ROUTE)
    nxt = tables[mark].entries.get((x, dst))
    if nxt is None:
        return Drop(DropReason.NO_ROUTE)
    fc = state.blocking(nxt)
    if fc is None and nxt in down_links:
        fc = FailedComponent.link(x, nxt)
        wait: Mode | None = (
            TimeslotWait(now, now + state.timers.t_slot) if state.protocol == EMRC else None
        )
    elif fc is None:
        return Forward(nxt, mark)
    else:
        wait = state.modes[fc]
    if isinstance(wait, TimeslotWait) and now < wait.deadline:
        return Hold(wait.deadline, fc)
    if fc == FailedComponent.node(dst):
        return Drop(DropReason.DESTINATION_DOWN)
    if isinstance(wait, BackupActive):
        k = wait.config_index
    else:
        k = _backup_index(cs, fc)
    if k is None:
        return Drop(DropReason.NO_BACKUP_CONFIG)
    if k in tried:
        return Drop(DropReason.SECOND_FAILURE_SAME_CONFIG)
    return _decide(state, dst, k, tried | {k}, tables, cs, now, down_links)


def on_packet(
    state: RouterState,
    pkt: Packet,
    tables: Sequence[ForwardingTable],
    cs: ConfigurationSet,
    now: int,
    link_status: Mapping[int, bool] | None = None,
) -> ForwardAction:
    """Decide what router ``state.node`` does with ``pkt`` at time ``now``.

    ``link_status`` optionally reports neighbors known to be unreachable
    that the router holds no failure entry for; they are handled as a link
    failure detected at ``now``.
    """
    if pkt.dst == state.node:
        return DeliverLocal()
    down = frozenset(v for v, up in (link_status or {}).items() if not up)
    tried = frozenset(pkt.tried_configs) | {pkt.config_mark}
    return _decide(state, pkt.dst, pkt.config_mark, tried, tables, cs, now, down)


def on_detect(state: RouterState, fc: FailedComponent, now: int, cs: ConfigurationSet) -> RouterState:
    """The router learns that an adjacent component is down."""
    if isinstance(state.mode(fc), (TimeslotWait, BackupActive)):
        return state
    if state.protocol == EMRC:
        return state.with_mode(fc, TimeslotWait(now, now + state.timers.t_slot))
    return state.with_mode(fc, BackupActive(now, _backup_index(cs, fc), None))


def on_recovery_notice(state: RouterState, fc: FailedComponent) -> RouterState:
    """The component came back while the router was still waiting out the timeslot."""
    if isinstance(state.mode(fc), TimeslotWait):
        return state.with_mode(fc, None)
    return state


def on_timeslot_expired(
    state: RouterState, fc: FailedComponent, live: bool, now: int, cs: ConfigurationSet
) -> RouterState:
    mode = state.mode(fc)
    if not isinstance(mode, TimeslotWait):
        return state
    if live:
        return state.with_mode(fc, None)
    return state.with_mode(
        fc, BackupActive(mode.detected_at, _backup_index(cs, fc), now + state.timers.t_probe)
    )


def on_probe_sent(state: RouterState, fc: FailedComponent, now: int) -> RouterState:
    mode = state.mode(fc)
    if not isinstance(mode, BackupActive) or mode.next_probe_at is None:
        return state
    return state.with_mode(fc, replace(mode, next_probe_at=now + state.timers.t_probe))


def on_probe_reply(state: RouterState, fc: FailedComponent) -> RouterState:
    """The failed component answered a probe: go back to the original routes."""
    if isinstance(state.mode(fc), BackupActive):
        return state.with_mode(fc, None)
    return state


def on_reconvergence_deadline(
    state: RouterState, fc: FailedComponent, now: int
) -> tuple[RouterState, ReconvergenceRequest | None]:
    mode = state.mode(fc)
    if not isinstance(mode, BackupActive):
        return state, None
    if now - mode.detected_at < state.timers.t_reconv:
        return state, None
    return state.with_mode(fc, Reconverged(now)), ReconvergenceRequest(fc, state.node, now)
