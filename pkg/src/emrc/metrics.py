"""Plot-ready outputs of simulation runs: packet CSVs, summaries, manifests."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from .simcore import SimResult, phase_of, scenario_to_dict

PACKET_COLUMNS = [
    "seq",
    "flow",
    "src",
    "dst",
    "phase",
    "injected_at",
    "delivered_at",
    "dropped_reason",
    "latency",
    "hop_count",
    "marks",
    "path",
]


def _cell(value) -> str:
    return "" if value is None else str(value)


def packets_csv(result: SimResult) -> str:
    """One row per injected packet, ordered by sequence number.

    ``marks`` lists the configuration marks the packet carried (``;``
    separated) and ``path`` the visited nodes (``-`` separated).
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PACKET_COLUMNS)
    failures = result.scenario.failures
    for r in result.records:
        w.writerow(
            [
                r.seq,
                r.flow,
                r.src,
                r.dst,
                phase_of(r.injected_at, failures),
                r.injected_at,
                _cell(r.delivered_at),
                _cell(r.drop_reason),
                _cell(r.latency),
                r.hop_count if r.delivered else "",
                ";".join(map(str, r.marks)),
                "-".join(map(str, r.path)),
            ]
        )
    return buf.getvalue()


def transitions_csv(result: SimResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["at", "node", "component", "before", "after", "cause"])
    for t in result.transitions:
        w.writerow([t.at, t.node, t.component, t.before, t.after, t.cause])
    return buf.getvalue()


def delta_csv(mrc: SimResult, emrc: SimResult) -> str:
    """Paired per-packet latencies of the two modes (empty when not delivered)."""
    if len(mrc.records) != len(emrc.records):
        raise ValueError("runs injected different packet counts")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["seq", "phase", "latency_mrc", "latency_emrc", "delta"])
    failures = emrc.scenario.failures
    for a, b in zip(mrc.records, emrc.records):
        delta = None if a.latency is None or b.latency is None else b.latency - a.latency
        w.writerow([a.seq, phase_of(a.injected_at, failures), _cell(a.latency), _cell(b.latency), _cell(delta)])
    return buf.getvalue()


def summary_json(result: SimResult) -> str:
    doc = dict(result.summary)
    doc["mode"] = result.scenario.mode
    doc["epochs"] = result.epochs
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


@dataclass
class RunManifest:
    """Everything needed to repeat a run and get the same CSV bytes."""

    topology: str | None
    scenario: str | None
    mode: str
    timers: dict
    seed: int
    out_dir: str
    version: str
    outputs: list[str] = field(default_factory=list)
    resolved_scenario: dict = field(default_factory=dict)

    def to_json(self) -> str:
        doc = {"kind": "RunManifest", **vars(self)}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def manifest_for(result: SimResult, *, scenario_path, topology_path, mode, out_dir, version, outputs) -> RunManifest:
    sc = result.scenario
    resolved = scenario_to_dict(sc)
    return RunManifest(
        topology=topology_path,
        scenario=scenario_path,
        mode=mode,
        timers=resolved["timers"],
        seed=sc.seed,
        out_dir=out_dir,
        version=version,
        outputs=sorted(outputs),
        resolved_scenario=resolved,
    )
