"""``emrc`` command line: validate topologies, generate configurations, run scenarios.

Exit codes: 0 success, 1 domain failure (not bi-connected, infeasible n,
simulator error), 2 input error (unreadable or malformed files, bad flags).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

from . import __version__
from .configgen import configset_to_json, coverage_report, generate_configs
from .errors import EMRCError, InsufficientConfigurations, NotBiconnected, ParseError, ScenarioError
from .forwarding import EMRC, MRC, Timers
from .metrics import delta_csv, manifest_for, packets_csv, summary_json, transitions_csv
from .routing import build_tables, tables_to_csv
from .simcore import Scenario, run, scenario_from_dict
from .topology import articulation_points, is_biconnected, is_connected, load_topology

OK, DOMAIN_FAILURE, INPUT_ERROR = 0, 1, 2


class InputError(Exception):
    pass


def _load_graph(path: str, directed: bool):
    try:
        return load_topology(path, directed=directed)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except ParseError as exc:
        raise InputError(f"{path}: parse error at {exc}") from None


# -- validate -------------------------------------------------------------------


def cmd_validate(args) -> int:
    g = _load_graph(args.topology, args.directed)
    print(f"parsed: {len(g.nodes)} nodes, {len(g.edges)} links ({len(g.links)} directed)")
    if not g.is_symmetric():
        print("warning: some link weights differ per direction")
    if len(g.nodes) < 3:
        print("biconnected: no (fewer than 3 nodes)")
        return DOMAIN_FAILURE
    if not is_connected(g):
        print("biconnected: no (disconnected)")
        return DOMAIN_FAILURE
    if is_biconnected(g):
        print("biconnected: yes")
        return OK
    cut = articulation_points(g)
    label = "node" if len(cut) == 1 else "nodes"
    print(f"biconnected: no (articulation {label} {', '.join(map(str, cut))})")
    return DOMAIN_FAILURE


# -- genconfig ------------------------------------------------------------------


def _parse_n(text: str):
    if text == "auto":
        return text
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"n must be a positive integer or 'auto', got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("n must be at least 1")
    return n


def cmd_genconfig(args) -> int:
    g = _load_graph(args.topology, args.directed)
    try:
        cs = generate_configs(g, args.n, seed=args.seed)
    except NotBiconnected as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DOMAIN_FAILURE
    except InsufficientConfigurations as exc:
        print(f"error: n={exc.n} is not enough; cannot isolate {exc.component}", file=sys.stderr)
        return DOMAIN_FAILURE
    text = configset_to_json(cs)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.tables:
        with open(args.tables, "w", encoding="utf-8") as fh:
            fh.write(tables_to_csv(build_tables(g, cs)))

    report = coverage_report(cs, g)
    log = sys.stderr if not args.out else sys.stdout
    print(f"{'config':>6}  isolated nodes / isolated links", file=log)
    for c in cs.backups():
        nodes = " ".join(map(str, sorted(c.isolated_nodes))) or "-"
        links = " ".join(f"{u}-{v}" for u, v in sorted(c.isolated_links)) or "-"
        print(f"{'C_' + str(c.index):>6}  {nodes} / {links}", file=log)
    verdict = "every node and link isolated exactly once" if report.ok else "coverage incomplete"
    print(f"coverage: {verdict}", file=log)
    if args.n == "auto":
        print(f"minimal n: {cs.n}", file=log)
    return OK if report.ok else DOMAIN_FAILURE


# -- run ------------------------------------------------------------------------


def _parse_timers(text: str) -> Timers:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("--timers takes t_slot,t_probe,t_reconv")
    try:
        return Timers(*(int(p) for p in parts))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _parse_seeds(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None


def _read_scenario_doc(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None


def _build_scenario(doc: dict, base_dir: str, directed: bool, timers, seed) -> Scenario:
    if directed:
        doc = {**doc, "directed": True}
    try:
        sc = scenario_from_dict(doc, base_dir)
    except OSError as exc:
        raise InputError(f"cannot read topology: {exc.strerror}") from None
    except (ParseError, ScenarioError) as exc:
        raise InputError(str(exc)) from None
    if timers is not None:
        sc = replace(sc, timers=timers)
    if seed is not None:
        sc = replace(sc, seed=seed)
    return sc


def _write(out_dir: str, name: str, text: str, written: list[str]) -> None:
    with open(os.path.join(out_dir, name), "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    written.append(name)


def _run_one(job: dict) -> str:
    """Run one seed of a scenario and write its outputs; returns a summary line."""
    sc = _build_scenario(job["doc"], job["base_dir"], job["directed"], job["timers"], job["seed"])
    out_dir = job["out_dir"]
    os.makedirs(out_dir, exist_ok=True)
    modes = [MRC, EMRC] if job["mode"] == "both" else [job["mode"]]
    results = {m: run(replace(sc, mode=m)) for m in modes}
    written: list[str] = []
    for m, res in results.items():
        _write(out_dir, f"packets_{m}.csv", packets_csv(res), written)
        _write(out_dir, f"transitions_{m}.csv", transitions_csv(res), written)
        _write(out_dir, f"summary_{m}.json", summary_json(res), written)
    if len(results) == 2:
        _write(out_dir, "delta.csv", delta_csv(results[MRC], results[EMRC]), written)
    topo = job["doc"].get("topology")
    first = results[modes[0]]
    manifest = manifest_for(
        first,
        scenario_path=job["scenario_path"],
        topology_path=topo if isinstance(topo, str) and "\n" not in topo else None,
        mode=job["mode"],
        out_dir=out_dir,
        version=__version__,
        outputs=written + ["manifest.json"],
    )
    _write(out_dir, "manifest.json", manifest.to_json(), written)
    parts = []
    for m, res in results.items():
        s = res.summary
        mean = "n/a" if s["mean_latency"] is None else f"{s['mean_latency']:.1f}"
        parts.append(f"{m}: delivered {s['delivered']}/{s['injected']} mean latency {mean}")
    return f"seed {sc.seed} -> {out_dir}: " + "; ".join(parts)


def cmd_run(args) -> int:
    doc = _read_scenario_doc(args.scenario)
    base_dir = os.path.dirname(os.path.abspath(args.scenario))
    # validate everything before any simulation starts
    first = _build_scenario(doc, base_dir, args.directed, args.timers, None)
    seeds = args.seed if args.seed is not None else [first.seed]
    jobs = []
    for s in seeds:
        out_dir = args.out if len(seeds) == 1 else os.path.join(args.out, f"seed-{s}")
        jobs.append(
            {
                "doc": doc,
                "base_dir": base_dir,
                "directed": args.directed,
                "timers": args.timers,
                "seed": s,
                "mode": args.mode,
                "out_dir": out_dir,
                "scenario_path": os.path.abspath(args.scenario),
            }
        )
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            lines = list(pool.map(_run_one, jobs))
    else:
        lines = [_run_one(j) for j in jobs]
    for line in lines:
        print(line)
    return OK


# -- entry point ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="emrc", description="Multiple routing configuration recovery toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse a topology and check bi-connectivity")
    p.add_argument("topology")
    p.add_argument("--directed", action="store_true", help="do not mirror links; every direction must be listed")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("genconfig", help="generate backup configurations for a topology")
    p.add_argument("topology")
    p.add_argument("n", nargs="?", type=_parse_n, default="auto", help="number of backup configurations or 'auto'")
    p.add_argument("--out", help="write the configuration JSON here instead of stdout")
    p.add_argument("--tables", help="also write per-configuration forwarding tables as CSV")
    p.add_argument("--seed", type=int, default=None, help="randomize tie-breaking in node order")
    p.add_argument("--directed", action="store_true")
    p.set_defaults(func=cmd_genconfig)

    p = sub.add_parser("run", help="simulate a scenario and write per-packet data")
    p.add_argument("scenario", help="scenario JSON (or a run manifest to replay)")
    p.add_argument("--mode", choices=[EMRC, MRC, "both"], default="both")
    p.add_argument("--out", default="emrc-out", help="output directory")
    p.add_argument("--seed", type=_parse_seeds, default=None, help="seed or comma-separated seed sweep")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers for seed sweeps")
    p.add_argument("--timers", type=_parse_timers, default=None, help="t_slot,t_probe,t_reconv in microseconds")
    p.add_argument("--directed", action="store_true")
    p.set_defaults(func=cmd_run)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return INPUT_ERROR if exc.code else OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR
    except EMRCError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DOMAIN_FAILURE


if __name__ == "__main__":
    sys.exit(main())
