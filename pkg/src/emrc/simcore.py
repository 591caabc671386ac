"""Deterministic discrete-event simulator for EMRC and MRC recovery.

Time is an integer tick count (microseconds).  A hop over link ``(u, v)``
takes ``link_delay * W_0(u, v)`` ticks; routers process packets instantly.
Neighbors of a failed component learn about it ``detection_delay`` ticks
after it goes down.  A packet sent toward a component that is down when it
arrives is kept by the sending router, which handles it once it detects the
failure (or retransmits it when the component comes back first).
"""

from __future__ import annotations

import heapq
import itertools
import json
import os
import random
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Any

from .configgen import ConfigurationSet, Configuration, generate_configs, restricted_weight
from .errors import EMRCError, InsufficientConfigurations, NotBiconnected, ScenarioError, UnknownComponent
from .forwarding import (
    EMRC,
    MODES,
    MRC,
    BackupActive,
    DeliverLocal,
    Drop,
    DropReason,
    FailedComponent,
    Forward,
    Hold,
    Packet,
    Reconverged,
    RouterState,
    TimeslotWait,
    Timers,
    mode_name,
    on_detect,
    on_packet,
    on_probe_reply,
    on_probe_sent,
    on_reconvergence_deadline,
    on_recovery_notice,
    on_timeslot_expired,
)
from .routing import ForwardingTable, build_tables, shortest_path
from .topology import Graph, is_connected, parse_topology

# -- scenario --------------------------------------------------------------------


@dataclass(frozen=True)
class Flow:
    src: int
    dst: int
    interval: int
    count: int
    start: int = 0


@dataclass(frozen=True)
class FailureSpec:
    component: FailedComponent
    down_at: int
    up_at: int | None = None


@dataclass(frozen=True)
class Scenario:
    topology: Graph
    flows: tuple[Flow, ...]
    failures: tuple[FailureSpec, ...] = ()
    mode: str = EMRC
    n: int | str = "auto"
    timers: Timers = Timers()
    link_delay: int = 1_000
    detection_delay: int = 10_000
    seed: int = 0
    jitter: int = 0
    hold_limit: int = 64
    until: int | None = None

    def validate(self) -> None:
        g = self.topology
        if self.mode not in MODES:
            raise ScenarioError(f"unknown mode {self.mode!r}")
        if self.n != "auto" and (not isinstance(self.n, int) or self.n < 1):
            raise ScenarioError(f"n must be a positive integer or 'auto', got {self.n!r}")
        if self.link_delay < 0 or self.detection_delay < 0 or self.jitter < 0:
            raise ScenarioError("delays must be non-negative")
        if self.hold_limit < 1:
            raise ScenarioError("hold_limit must be positive")
        for f in self.flows:
            for x in (f.src, f.dst):
                if not g.has_node(x):
                    raise ScenarioError(f"flow references unknown node {x}")
            if f.src == f.dst:
                raise ScenarioError(f"flow {f.src}->{f.dst} has identical endpoints")
            if f.interval <= 0 or f.count < 0 or f.start < 0:
                raise ScenarioError(f"flow {f.src}->{f.dst} has invalid timing")
        windows: dict[FailedComponent, list[tuple[int, float]]] = {}
        for fs in self.failures:
            _check_component(g, fs.component)
            if fs.down_at < 0 or (fs.up_at is not None and fs.up_at <= fs.down_at):
                raise ScenarioError(f"failure of {fs.component} has invalid times")
            end = float("inf") if fs.up_at is None else fs.up_at
            for lo, hi in windows.get(fs.component, []):
                if fs.down_at < hi and lo < end:
                    raise ScenarioError(f"overlapping failures of {fs.component}")
            windows.setdefault(fs.component, []).append((fs.down_at, end))


def _check_component(g: Graph, fc: FailedComponent) -> None:
    if fc.is_node:
        if not g.has_node(fc.ids[0]):
            raise UnknownComponent(f"{fc} is not in the topology")
    elif not g.has_edge(*fc.ids):
        raise UnknownComponent(f"{fc} is not in the topology")


def _component_from_json(obj: Any) -> FailedComponent:
    if isinstance(obj, str):
        return FailedComponent.parse(obj)
    if isinstance(obj, dict) and "node" in obj:
        return FailedComponent.node(int(obj["node"]))
    if isinstance(obj, dict) and "link" in obj:
        return FailedComponent.link(*map(int, obj["link"]))
    raise ScenarioError(f"cannot read component {obj!r}")


def scenario_from_dict(doc: dict, base_dir: str = ".") -> Scenario:
    """Build a scenario from its JSON document form.

    ``topology`` may be a path (relative to ``base_dir``), a topology text, or
    an inline ``{"nodes": ..., "links": ...}`` object.  A run manifest is
    accepted too and replays its resolved scenario.
    """
    if doc.get("kind") == "RunManifest":
        doc = doc["resolved_scenario"]
    topo = doc.get("topology")
    if isinstance(topo, dict):
        graph = parse_topology(json.dumps(topo))
    elif isinstance(topo, str) and ("\n" in topo or topo.lstrip().startswith("node")):
        graph = parse_topology(topo)
    elif isinstance(topo, str):
        with open(os.path.join(base_dir, topo), encoding="utf-8") as fh:
            graph = parse_topology(fh.read(), directed=bool(doc.get("directed", False)))
    else:
        raise ScenarioError("scenario needs a 'topology'")
    try:
        timers = Timers(**doc.get("timers", {}))
        flows = tuple(Flow(**f) for f in doc.get("flows", []))
        failures = tuple(
            FailureSpec(_component_from_json(f["component"]), int(f["down_at"]), f.get("up_at"))
            for f in doc.get("failures", [])
        )
        sc = Scenario(
            topology=graph,
            flows=flows,
            failures=failures,
            mode=doc.get("mode", EMRC),
            n=doc.get("n", "auto"),
            timers=timers,
            link_delay=int(doc.get("link_delay", 1_000)),
            detection_delay=int(doc.get("detection_delay", 10_000)),
            seed=int(doc.get("seed", 0)),
            jitter=int(doc.get("jitter", 0)),
            hold_limit=int(doc.get("hold_limit", 64)),
            until=doc.get("until"),
        )
    except (TypeError, ValueError, KeyError) as exc:
        raise ScenarioError(f"malformed scenario: {exc}") from None
    sc.validate()
    return sc


def load_scenario(path: str) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return scenario_from_dict(doc, os.path.dirname(os.path.abspath(path)))


def scenario_to_dict(sc: Scenario) -> dict:
    return {
        "topology": {
            "nodes": list(sc.topology.nodes),
            "links": [[u, v, w] for (u, v), w in sc.topology.weights.items()],
            "directed": True,
        },
        "mode": sc.mode,
        "n": sc.n,
        "timers": {"t_slot": sc.timers.t_slot, "t_probe": sc.timers.t_probe, "t_reconv": sc.timers.t_reconv},
        "link_delay": sc.link_delay,
        "detection_delay": sc.detection_delay,
        "flows": [vars(f).copy() for f in sc.flows],
        "failures": [
            {"component": str(f.component), "down_at": f.down_at, "up_at": f.up_at} for f in sc.failures
        ],
        "seed": sc.seed,
        "jitter": sc.jitter,
        "hold_limit": sc.hold_limit,
        "until": sc.until,
    }


# -- routing epochs ------------------------------------------------------------------


@dataclass(frozen=True)
class RoutingEpoch:
    """Routing state between two re-convergences."""

    number: int
    graph: Graph
    configs: ConfigurationSet
    tables: tuple[ForwardingTable, ...]
    excluded: frozenset[FailedComponent]
    degraded: bool


def reconverge(
    base: Graph,
    excluded: frozenset[FailedComponent] | set[FailedComponent],
    n: int | str,
    number: int = 0,
    seed: int | None = None,
) -> RoutingEpoch:
    """Routing for ``base`` minus ``excluded``.

    When the remaining topology cannot be protected, only ``C_0`` is built and
    the epoch is marked degraded.
    """
    excluded = frozenset(excluded)
    graph = base.without(
        nodes=[fc.ids[0] for fc in excluded if fc.is_node],
        edges=[fc.ids for fc in excluded if not fc.is_node],
    )
    degraded = False
    try:
        try:
            cs = generate_configs(graph, n, seed)
        except InsufficientConfigurations:
            if n == "auto":
                raise
            cs = generate_configs(graph, "auto", seed)
    except (NotBiconnected, InsufficientConfigurations):
        degraded = True
        w_r = restricted_weight(graph)
        cs = ConfigurationSet((Configuration.normal(graph, w_r),), w_r)
    tables = tuple(build_tables(graph, cs, allow_unreachable=degraded and not is_connected(graph)))
    return RoutingEpoch(number, graph, cs, tables, excluded, degraded)


# -- results -----------------------------------------------------------------------


@dataclass
class PacketRecord:
    seq: int
    flow: int
    src: int
    dst: int
    injected_at: int
    delivered_at: int | None = None
    drop_reason: str | None = None
    dropped_at: int | None = None
    hops: list[tuple[int, int, int, int]] = field(default_factory=list)

    @property
    def delivered(self) -> bool:
        return self.delivered_at is not None

    @property
    def dropped(self) -> bool:
        return self.drop_reason is not None

    @property
    def path(self) -> list[int]:
        return [h[0] for h in self.hops]

    @property
    def marks(self) -> list[int]:
        """Configuration marks carried, in order, without repeats of consecutive values."""
        out: list[int] = []
        for _, mark, _, _ in self.hops:
            if not out or out[-1] != mark:
                out.append(mark)
        return out

    @property
    def hop_count(self) -> int:
        return max(len(self.hops) - 1, 0)

    @property
    def latency(self) -> int | None:
        return None if self.delivered_at is None else self.delivered_at - self.injected_at


@dataclass(frozen=True)
class Transition:
    at: int
    node: int
    component: str
    before: str
    after: str
    cause: str


@dataclass
class SimResult:
    scenario: Scenario
    records: list[PacketRecord]
    transitions: list[Transition]
    epochs: list[dict]
    summary: dict

    def record(self, seq: int) -> PacketRecord:
        return self.records[seq]


def phase_of(t: int, failures: tuple[FailureSpec, ...]) -> str:
    """``pre-failure`` / ``during-failure`` / ``post-recovery`` for an injection time."""
    if not failures or t < min(f.down_at for f in failures):
        return "pre-failure"
    for f in failures:
        if f.down_at <= t and (f.up_at is None or t < f.up_at):
            return "during-failure"
    return "post-recovery"


def _mean(values: list[int]) -> float | None:
    return sum(values) / len(values) if values else None


def summarize(records: list[PacketRecord], failures: tuple[FailureSpec, ...] = ()) -> dict:
    delivered = [r for r in records if r.delivered]
    phases = {}
    for phase in ("pre-failure", "during-failure", "post-recovery"):
        rs = [r for r in records if phase_of(r.injected_at, failures) == phase]
        ds = [r for r in rs if r.delivered]
        phases[phase] = {
            "packets": len(rs),
            "delivered": len(ds),
            "mean_latency": _mean([r.latency for r in ds]),
        }
    reasons: dict[str, int] = {}
    for r in records:
        if r.dropped:
            reasons[r.drop_reason] = reasons.get(r.drop_reason, 0) + 1
    return {
        "injected": len(records),
        "delivered": len(delivered),
        "dropped": sum(1 for r in records if r.dropped),
        "in_flight": sum(1 for r in records if not r.delivered and not r.dropped),
        "drop_reasons": dict(sorted(reasons.items())),
        "mean_latency": _mean([r.latency for r in delivered]),
        "mean_hop_count": _mean([r.hop_count for r in delivered]),
        "backup_marked": sum(1 for r in records if any(m != 0 for m in r.marks)),
        "phases": phases,
    }


# -- the simulator ---------------------------------------------------------------------

INJECT = "PacketInject"
ARRIVE = "PacketArrive"
DOWN = "ComponentDown"
UP = "ComponentUp"
DETECT_DOWN = "DetectDown"
DETECT_UP = "DetectUp"
TIMESLOT = "TimeslotExpire"
PROBE_SEND = "ProbeSend"
PROBE_ARRIVE = "ProbeArrive"
PROBE_REPLY = "ProbeReply"
RECONV_DEADLINE = "ReconvergenceDeadline"
RECONVERGE = "ReconvergenceDone"

_MAX_EVENTS = 5_000_000


class Simulator:
    """One run of a scenario; use :func:`run` rather than driving this directly."""

    def __init__(self, sc: Scenario):
        sc.validate()
        self.sc = sc
        self.base = sc.topology
        self.timers = sc.timers
        self.queue: list = []
        self._seq = itertools.count()
        self.now = 0
        self.epoch = reconverge(self.base, frozenset(), sc.n, 0)
        if self.epoch.degraded:
            raise NotBiconnected("scenario topology cannot be protected")
        self.down: dict[FailedComponent, int] = {}
        self.detected: set[FailedComponent] = set()
        self.incarnation: dict[FailedComponent, int] = {}
        self.routers = {u: self._fresh_router(u) for u in self.base.nodes}
        self.held: dict[tuple[int, FailedComponent], deque] = {}
        self.pending: dict[tuple[int, FailedComponent], list] = {}
        self.records: list[PacketRecord] = []
        self.packets: dict[int, Packet] = {}
        self.pkt_epoch: dict[int, int] = {}
        self.visited: dict[int, set] = {}
        self.transitions: list[Transition] = []
        self.epochs: list[dict] = [self._epoch_info("initial")]
        self.last_event_at = 0

    # -- plumbing

    def _fresh_router(self, u: int) -> RouterState:
        return RouterState(u, self.sc.mode, self.timers)

    def _epoch_info(self, cause: str) -> dict:
        e = self.epoch
        return {
            "epoch": e.number,
            "at": self.now,
            "cause": cause,
            "excluded": sorted(str(c) for c in e.excluded),
            "n": e.configs.n,
            "degraded": e.degraded,
        }

    def schedule(self, at: int, kind: str, *payload) -> None:
        if at < self.now:
            raise RuntimeError("cannot schedule into the past")
        heapq.heappush(self.queue, (at, next(self._seq), kind, payload))

    def _set_router(self, u: int, new: RouterState, fc: FailedComponent, cause: str) -> None:
        old = self.routers[u]
        before, after = mode_name(old.mode(fc)), mode_name(new.mode(fc))
        self.routers[u] = new
        if before != after:
            self.transitions.append(Transition(self.now, u, str(fc), before, after, cause))

    def _alive(self, u: int) -> bool:
        return FailedComponent.node(u) not in self.down

    def _delay(self, u: int, v: int) -> int:
        return self.sc.link_delay * self.base.weight(u, v)

    def _physical_block(self, u: int, v: int) -> FailedComponent | None:
        node = FailedComponent.node(v)
        if node in self.down:
            return node
        link = FailedComponent.link(u, v)
        if link in self.down:
            return link
        return None

    def _detectors(self, fc: FailedComponent) -> list[int]:
        if fc.is_node:
            return list(self.base.neighbors(fc.ids[0]))
        return list(fc.ids)

    # -- packet handling

    def _drop(self, p: Packet, reason: DropReason) -> None:
        rec = self.records[p.seq]
        rec.drop_reason = reason.value
        rec.dropped_at = self.now

    def _refresh(self, p: Packet, at: int | None = None) -> None:
        """Re-convergence invalidates marks carried under the previous routing.

        Marks name configurations of one routing epoch, so loop detection
        starts over too (``at`` is the node currently holding the packet).
        """
        if self.pkt_epoch[p.seq] != self.epoch.number:
            self.pkt_epoch[p.seq] = self.epoch.number
            p.config_mark = 0
            p.tried_configs = {0}
            self.visited[p.seq] = set() if at is None else {(at, 0)}

    def _visit(self, u: int, p: Packet) -> bool:
        key = (u, p.config_mark)
        seen = self.visited[p.seq]
        if key in seen:
            self._drop(p, DropReason.LOOP_DETECTED)
            return False
        seen.add(key)
        p.hops.append(key)
        self.records[p.seq].hops.append((u, p.config_mark, self.epoch.number, self.now))
        return True

    def _remark(self, u: int, p: Packet, mark: int) -> None:
        # hop records carry the mark a packet leaves the node with
        p.config_mark = mark
        p.tried_configs.add(mark)
        self.visited[p.seq].add((u, mark))
        p.hops[-1] = (u, mark)
        rec = self.records[p.seq]
        rec.hops[-1] = (u, mark, self.epoch.number, rec.hops[-1][3])

    def _handle(self, u: int, p: Packet) -> None:
        self._refresh(p, u)
        if FailedComponent.node(p.dst) in self.epoch.excluded:
            self._drop(p, DropReason.DESTINATION_DOWN)
            return
        act = on_packet(self.routers[u], p, self.epoch.tables, self.epoch.configs, self.now)
        if isinstance(act, DeliverLocal):
            self.records[p.seq].delivered_at = self.now
        elif isinstance(act, Forward):
            if act.mark != p.config_mark or self.records[p.seq].hops[-1][2] != self.epoch.number:
                self._remark(u, p, act.mark)
            self.schedule(self.now + self._delay(u, act.next), ARRIVE, u, act.next, p)
        elif isinstance(act, Hold):
            buf = self.held.setdefault((u, act.component), deque())
            if len(buf) >= self.sc.hold_limit:
                self._drop(buf.popleft(), DropReason.HOLD_OVERFLOW)
            buf.append(p)
        elif isinstance(act, Drop):
            self._drop(p, act.reason)

    def _release(self, key: tuple[int, FailedComponent], store: dict) -> None:
        items = store.pop(key, None)
        if items:
            for p in list(items):
                self._handle(key[0], p)

    # -- event handlers

    def _on_inject(self, flow_idx: int, seq: int) -> None:
        f = self.sc.flows[flow_idx]
        rec = PacketRecord(seq, flow_idx, f.src, f.dst, self.now)
        self.records.append(rec)
        p = Packet(f.src, f.dst, seq)
        self.packets[seq] = p
        self.pkt_epoch[seq] = self.epoch.number
        self.visited[seq] = set()
        if not self._alive(f.src):
            self._drop(p, DropReason.SOURCE_DOWN)
            return
        self._visit(f.src, p)
        self._handle(f.src, p)

    def _on_arrive(self, u: int, v: int, p: Packet) -> None:
        block = self._physical_block(u, v)
        if block is not None:
            if not self._alive(u):
                self._drop(p, DropReason.COMPONENT_DOWN)
            elif self.routers[u].blocking(v) is not None or block in self.epoch.excluded:
                self._handle(u, p)
            else:
                self.pending.setdefault((u, block), []).append(p)
            return
        self._refresh(p)
        if self._visit(v, p):
            self._handle(v, p)

    def _on_down(self, fc: FailedComponent) -> None:
        inc = self.incarnation.get(fc, 0) + 1
        self.incarnation[fc] = inc
        self.down[fc] = inc
        if fc.is_node:
            u = fc.ids[0]
            for key in sorted(k for k in list(self.held) + list(self.pending) if k[0] == u):
                for p in list(self.held.pop(key, [])) + self.pending.pop(key, []):
                    self._drop(p, DropReason.COMPONENT_DOWN)
        for x in self._detectors(fc):
            self.schedule(self.now + self.sc.detection_delay, DETECT_DOWN, x, fc, inc)

    def _on_up(self, fc: FailedComponent) -> None:
        self.down.pop(fc, None)
        self.detected.discard(fc)
        if fc.is_node:
            u = fc.ids[0]
            self.routers[u] = self._fresh_router(u)
        for key in sorted(k for k in self.pending if k[1] == fc):
            self._release(key, self.pending)
        for x in self._detectors(fc):
            self.schedule(self.now + self.sc.detection_delay, DETECT_UP, x, fc)
        if fc in self.epoch.excluded:
            self.schedule(self.now + self.sc.detection_delay, RECONVERGE, f"{fc} restored", None)

    def _on_detect_down(self, x: int, fc: FailedComponent, inc: int) -> None:
        if not self._alive(x) or self.down.get(fc) != inc or fc in self.epoch.excluded:
            return
        self.detected.add(fc)
        state = on_detect(self.routers[x], fc, self.now, self.epoch.configs)
        self._set_router(x, state, fc, DETECT_DOWN)
        mode = state.mode(fc)
        tag = self.epoch.number
        if isinstance(mode, TimeslotWait):
            self.schedule(mode.deadline, TIMESLOT, x, fc, tag)
        elif isinstance(mode, BackupActive):
            self.schedule(mode.detected_at + self.timers.t_reconv, RECONV_DEADLINE, x, fc, tag)
        self._release((x, fc), self.pending)

    def _on_detect_up(self, x: int, fc: FailedComponent) -> None:
        if not self._alive(x) or fc in self.down:
            return
        state = on_recovery_notice(self.routers[x], fc)
        self._set_router(x, state, fc, DETECT_UP)
        if state.mode(fc) is None:
            self._release((x, fc), self.held)

    def _on_timeslot(self, x: int, fc: FailedComponent, tag: int) -> None:
        if tag != self.epoch.number or not self._alive(x):
            return
        state = on_timeslot_expired(self.routers[x], fc, fc not in self.down, self.now, self.epoch.configs)
        self._set_router(x, state, fc, TIMESLOT)
        mode = state.mode(fc)
        if isinstance(mode, BackupActive):
            self.schedule(mode.next_probe_at, PROBE_SEND, x, fc, tag)
            self.schedule(mode.detected_at + self.timers.t_reconv, RECONV_DEADLINE, x, fc, tag)
        self._release((x, fc), self.held)

    def _probe_delay(self, x: int, fc: FailedComponent, config_index: int | None) -> int:
        if not fc.is_node:
            a, b = fc.ids
            return self._delay(x, b if x == a else a)
        target = fc.ids[0]
        if config_index is not None:
            try:
                path = shortest_path(self.epoch.graph, self.epoch.configs[config_index], x, target)
                return sum(self._delay(a, b) for a, b in zip(path.nodes, path.nodes[1:]))
            except EMRCError:
                pass
        return self._delay(x, target)

    def _on_probe_send(self, x: int, fc: FailedComponent, tag: int) -> None:
        if tag != self.epoch.number or not self._alive(x):
            return
        mode = self.routers[x].mode(fc)
        if not isinstance(mode, BackupActive) or mode.next_probe_at != self.now:
            return
        one_way = self._probe_delay(x, fc, mode.config_index)
        self.schedule(self.now + one_way, PROBE_ARRIVE, x, fc, tag, one_way)
        state = on_probe_sent(self.routers[x], fc, self.now)
        self.routers[x] = state
        self.schedule(state.mode(fc).next_probe_at, PROBE_SEND, x, fc, tag)

    def _on_probe_arrive(self, x: int, fc: FailedComponent, tag: int, one_way: int) -> None:
        if tag == self.epoch.number and fc not in self.down:
            self.schedule(self.now + one_way, PROBE_REPLY, x, fc, tag)

    def _on_probe_reply(self, x: int, fc: FailedComponent, tag: int) -> None:
        if tag != self.epoch.number or not self._alive(x):
            return
        self._set_router(x, on_probe_reply(self.routers[x], fc), fc, PROBE_REPLY)

    def _on_reconv_deadline(self, x: int, fc: FailedComponent, tag: int) -> None:
        if tag != self.epoch.number or not self._alive(x):
            return
        state, request = on_reconvergence_deadline(self.routers[x], fc, self.now)
        self._set_router(x, state, fc, RECONV_DEADLINE)
        if request is not None:
            self.schedule(self.now, RECONVERGE, f"{fc} deemed permanent by node {x}", tag)

    def _on_reconverge(self, cause: str, tag: int | None) -> None:
        # tag: epoch of a deadline request (dropped once superseded); None for a restore
        excluded = frozenset(fc for fc in self.detected if fc in self.down)
        if tag is None and excluded == self.epoch.excluded:
            return
        if tag is not None and tag != self.epoch.number:
            return
        self.epoch = reconverge(self.base, excluded, self.sc.n, self.epoch.number + 1)
        self.epochs.append(self._epoch_info(cause))
        for u, state in self.routers.items():
            keep = {fc: Reconverged(self.now) for fc in state.modes if fc in excluded}
            new = self._fresh_router(u)
            for fc, mode in keep.items():
                new = new.with_mode(fc, mode)
            for fc in state.modes:
                self._set_router(u, new, fc, RECONVERGE)
            self.routers[u] = new
        for store in (self.held, self.pending):
            for key in sorted(store):
                self._release(key, store)

    # -- main loop

    def run(self) -> SimResult:
        rng = random.Random(self.sc.seed)
        seq = 0
        for i, f in enumerate(self.sc.flows):
            for k in range(f.count):
                t = f.start + k * f.interval
                if self.sc.jitter:
                    t += rng.randrange(self.sc.jitter + 1)
                self.schedule(t, INJECT, i, None)
        for fs in self.sc.failures:
            self.schedule(fs.down_at, DOWN, fs.component)
            if fs.up_at is not None:
                self.schedule(fs.up_at, UP, fs.component)

        handlers = {
            ARRIVE: self._on_arrive,
            DOWN: self._on_down,
            UP: self._on_up,
            DETECT_DOWN: self._on_detect_down,
            DETECT_UP: self._on_detect_up,
            TIMESLOT: self._on_timeslot,
            PROBE_SEND: self._on_probe_send,
            PROBE_ARRIVE: self._on_probe_arrive,
            PROBE_REPLY: self._on_probe_reply,
            RECONV_DEADLINE: self._on_reconv_deadline,
            RECONVERGE: self._on_reconverge,
        }
        processed = 0
        while self.queue:
            at, _, kind, payload = heapq.heappop(self.queue)
            if self.sc.until is not None and at > self.sc.until:
                break
            if at < self.last_event_at:
                raise RuntimeError("event processed out of order")  # pragma: no cover
            self.now = self.last_event_at = at
            if kind == INJECT:
                self._on_inject(payload[0], seq)
                seq += 1
            else:
                handlers[kind](*payload)
            processed += 1
            if processed > _MAX_EVENTS:
                raise RuntimeError("event budget exhausted")  # pragma: no cover

        records = sorted(self.records, key=lambda r: r.seq)
        return SimResult(
            scenario=self.sc,
            records=records,
            transitions=self.transitions,
            epochs=self.epochs,
            summary=summarize(records, self.sc.failures),
        )


def run(sc: Scenario) -> SimResult:
    """Simulate ``sc``; deterministic for a given scenario (seed included)."""
    return Simulator(sc).run()


def run_comparison(sc: Scenario) -> tuple[SimResult, SimResult]:
    """Run the same scenario in MRC and EMRC mode; returns ``(mrc, emrc)``."""
    return run(replace(sc, mode=MRC)), run(replace(sc, mode=EMRC))


def inject_failure(sc: Scenario, component: FailedComponent, at: int) -> Scenario:
    """Scenario copy with ``component`` going down at ``at``."""
    _check_component(sc.topology, component)
    return replace(sc, failures=sc.failures + (FailureSpec(component, at, None),))


def inject_recovery(sc: Scenario, component: FailedComponent, at: int) -> Scenario:
    """Scenario copy with the open failure of ``component`` ending at ``at``."""
    _check_component(sc.topology, component)
    failures = list(sc.failures)
    for i in range(len(failures) - 1, -1, -1):
        f = failures[i]
        if f.component == component and f.up_at is None:
            if at <= f.down_at:
                raise ScenarioError(f"recovery of {component} precedes its failure")
            failures[i] = replace(f, up_at=at)
            return replace(sc, failures=tuple(failures))
    raise ScenarioError(f"{component} has no open failure to recover from")
