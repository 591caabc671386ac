from __future__ import annotations

import json
import random
from dataclasses import replace

import pytest

from emrc.configgen import generate_configs
from emrc.errors import NotBiconnected, ScenarioError, UnknownComponent
from emrc.fixtures import complete, figure3_graph, figure3_scenario, path_graph, ring
from emrc.forwarding import EMRC, MRC, DropReason, FailedComponent, Timers, select_backup_config
from emrc.simcore import (
    FailureSpec,
    Flow,
    Scenario,
    inject_failure,
    inject_recovery,
    phase_of,
    run,
    run_comparison,
    scenario_from_dict,
    scenario_to_dict,
    summarize,
)

from helpers import loop_violations, random_biconnected, random_scenario

NODE5 = FailedComponent.node(5)


def _nonzero(rec):
    return any(m != 0 for m in rec.marks)


def test_no_failure_single_flow():
    g = figure3_graph(2)
    res = run(Scenario(g, (Flow(1, 0, 1_000, 20),)))
    assert res.summary["delivered"] == 20
    assert all(r.path == [1, 4, 5, 0] and r.marks == [0] for r in res.records)
    assert all(r.latency == 3_000 for r in res.records)
    assert res.transitions == []


def test_hop_delay_scales_with_weight():
    g = figure3_graph(3)
    res = run(Scenario(g, (Flow(4, 7, 1_000, 1),)))
    assert res.records[0].latency == 3_000


def test_short_outage_keeps_original_route():
    sc = figure3_scenario(down_at=100_000, up_at=120_000)
    res = run(sc)
    assert res.summary["delivered"] == 1_000
    assert not any(_nonzero(r) for r in res.records)
    assert all(r.path == [1, 4, 5, 0] for r in res.records)


def test_long_outage_uses_backup_then_reverts():
    sc = figure3_scenario()
    res = run(sc)
    cs = generate_configs(sc.topology)
    k = select_backup_config(cs, NODE5)
    marked = [r for r in res.records if _nonzero(r)]
    assert marked
    assert all(r.path == [1, 4, 7, 0] and r.marks == [0, k] for r in marked)
    late = [r for r in res.records if r.injected_at > 500_000]
    assert all(r.path == [1, 4, 5, 0] and r.marks == [0] for r in late)
    causes = {(t.node, t.after, t.cause) for t in res.transitions}
    assert (4, "BackupActive", "TimeslotExpire") in causes
    assert (4, "Normal", "ProbeReply") in causes


def test_comparison_transient_failure():
    mrc, emrc = run_comparison(figure3_scenario(up_at=115_000))
    assert any(_nonzero(r) for r in mrc.records)
    assert not any(_nonzero(r) for r in emrc.records)


def test_node_failure_detected_by_all_neighbors():
    sc = figure3_scenario(up_at=None, count=10)
    res = run(replace(sc, until=200_000))
    detectors = {t.node for t in res.transitions if t.cause == "DetectDown"}
    assert detectors == set(sc.topology.neighbors(5))
    assert all(t.at == 110_000 for t in res.transitions if t.cause == "DetectDown")


def test_link_failure_detected_by_endpoints_only():
    sc = figure3_scenario(count=10)
    sc = replace(sc, failures=(FailureSpec(FailedComponent.link(4, 5), 1_000, None),), until=100_000)
    res = run(sc)
    assert {t.node for t in res.transitions if t.cause == "DetectDown"} == {4, 5}


def test_persistent_failure_triggers_reconvergence():
    sc = figure3_scenario(up_at=None, count=1_500)
    res = run(sc)
    assert len(res.epochs) == 2
    assert res.epochs[1]["excluded"] == ["node 5"]
    assert res.epochs[1]["at"] == 110_000 + sc.timers.t_reconv
    after = [r for r in res.records if r.injected_at > res.epochs[1]["at"]]
    assert after and all(r.delivered and r.marks == [0] and 5 not in r.path for r in after)
    assert res.summary["delivered"] == res.summary["injected"]


def test_mrc_reconverges_once_when_several_neighbors_time_out():
    res = run(replace(figure3_scenario(up_at=None, count=1_200), mode=MRC))
    assert len(res.epochs) == 2


def test_degraded_reconvergence_keeps_forwarding():
    g = ring(5)
    sc = Scenario(
        g,
        (Flow(1, 3, 5_000, 400),),
        (FailureSpec(FailedComponent.node(2), 50_000, None),),
        mode=EMRC,
    )
    res = run(sc)
    assert res.epochs[-1]["degraded"]
    after = [r for r in res.records if r.injected_at > res.epochs[-1]["at"]]
    assert after and all(r.path == [1, 0, 4, 3] for r in after)
    assert res.summary["delivered"] == res.summary["injected"]


def test_recovery_after_reconvergence_restores_full_topology():
    sc = figure3_scenario(up_at=1_500_000, count=2_000)
    res = run(sc)
    assert [e["excluded"] for e in res.epochs] == [[], ["node 5"], []]
    last = [r for r in res.records if r.injected_at > res.epochs[-1]["at"]]
    assert all(r.path == [1, 4, 5, 0] for r in last)


def test_source_down_and_destination_down():
    g = figure3_graph(2)
    sc = Scenario(
        g,
        (Flow(5, 0, 1_000, 50), Flow(1, 5, 1_000, 50)),
        (FailureSpec(NODE5, 10_000, None),),
        mode=MRC,
    )
    reasons = run(sc).summary["drop_reasons"]
    # the injection at 10_000 is queued before the failure event of the same tick
    assert reasons["SourceDown"] == 39
    assert reasons["DestinationDown"] > 0


def test_hold_buffer_overflow_drops_oldest():
    sc = replace(figure3_scenario(count=2_000, interval=100), hold_limit=4)
    res = run(sc)
    # packets reaching node 4 between the failure (t=100_000, one hop from 1)
    # and the end of its timeslot (t=140_000) are all held there
    waiting = [r for r in res.records if 98_000 <= r.injected_at < 139_000]
    kept = [r for r in waiting if r.delivered]
    assert [r.seq for r in kept] == [r.seq for r in waiting[-4:]]
    assert all(r.drop_reason == "HoldOverflow" for r in waiting[:-4])
    assert res.summary["drop_reasons"] == {"HoldOverflow": len(waiting) - 4}


def test_conservation_and_summary_consistency():
    rng = random.Random(11)
    for _ in range(10):
        g = random_biconnected(rng, 4, 9)
        res = run(random_scenario(rng, g, 2, rng.choice([EMRC, MRC])))
        s = res.summary
        assert s["injected"] == s["delivered"] + s["dropped"] + s["in_flight"]
        for r in res.records:
            assert not (r.delivered and r.dropped)
        assert s == summarize(res.records, res.scenario.failures)
        lat = [r.latency for r in res.records if r.delivered]
        if lat:
            assert s["mean_latency"] == pytest.approx(sum(lat) / len(lat))
        assert sum(s["drop_reasons"].values()) == s["dropped"]


def test_runs_to_completion_without_in_flight_packets():
    res = run(figure3_scenario())
    assert res.summary["in_flight"] == 0


def test_until_stops_early():
    res = run(replace(figure3_scenario(), until=50_000))
    assert res.summary["injected"] == 51


def test_marked_packets_respect_isolation():
    """A packet marked i never crosses a link isolated in C_i or transits S_i."""
    rng = random.Random(3)
    for _ in range(15):
        g = random_biconnected(rng, 4, 9)
        sc = random_scenario(rng, g, 2, rng.choice([EMRC, MRC]))
        sc = replace(sc, timers=Timers(30_000, 20_000, 10**8), until=5_000_000)
        cs = generate_configs(g)
        res = run(sc)
        assert len(res.epochs) == 1
        for r in res.records:
            for (x, mark, _, _), (y, _, _, _) in zip(r.hops, r.hops[1:]):
                c = cs[mark]
                assert c.cost(x, y) is not None
                assert y == r.dst or y not in c.isolated_nodes


def test_backup_marks_only_near_a_failure():
    sc = figure3_scenario()
    res = run(sc)
    fs = sc.failures[0]
    slack = sc.timers.t_probe + 2 * sc.link_delay * sum(sc.topology.weights.values())
    for r in res.records:
        for node, mark, _, t in r.hops:
            if mark != 0 and node == 4:
                assert fs.down_at <= t + sc.timers.t_slot + sc.detection_delay
                assert t <= fs.up_at + slack


def test_phases():
    fs = (FailureSpec(NODE5, 100, 200),)
    assert phase_of(50, fs) == "pre-failure"
    assert phase_of(100, fs) == "during-failure"
    assert phase_of(200, fs) == "post-recovery"
    assert phase_of(5, ()) == "pre-failure"


def test_determinism_with_jitter():
    sc = replace(figure3_scenario(), jitter=700, seed=42)
    a, b = run(sc), run(sc)
    assert a.records == b.records and a.transitions == b.transitions
    c = run(replace(sc, seed=43))
    assert [r.injected_at for r in c.records] != [r.injected_at for r in a.records]


def test_inject_failure_and_recovery():
    sc = figure3_scenario(count=10)
    sc = replace(sc, failures=())
    sc2 = inject_recovery(inject_failure(sc, NODE5, 100), NODE5, 500)
    assert sc2.failures == (FailureSpec(NODE5, 100, 500),)
    with pytest.raises(UnknownComponent):
        inject_failure(sc, FailedComponent.node(42), 1)
    with pytest.raises(ScenarioError):
        inject_recovery(sc, NODE5, 10)
    with pytest.raises(ScenarioError):
        inject_recovery(inject_failure(sc, NODE5, 100), NODE5, 50)


@pytest.mark.parametrize(
    "change",
    [
        {"flows": (Flow(1, 9, 1, 1),)},
        {"flows": (Flow(1, 1, 1, 1),)},
        {"flows": (Flow(1, 0, 0, 1),)},
        {"mode": "ospf"},
        {"n": 0},
        {"failures": (FailureSpec(FailedComponent.link(1, 0), 5),)},
        {"failures": (FailureSpec(NODE5, 5, 5),)},
        {"failures": (FailureSpec(NODE5, 5, 50), FailureSpec(NODE5, 40, 90))},
    ],
)
def test_invalid_scenarios(change):
    with pytest.raises(ScenarioError):
        run(replace(figure3_scenario(count=1), **change))


def test_unprotectable_topology_rejected():
    with pytest.raises(NotBiconnected):
        run(Scenario(path_graph(3), (Flow(0, 2, 1, 1),)))


def test_scenario_dict_round_trip(tmp_path):
    sc = replace(figure3_scenario(count=30), jitter=100, seed=9)
    doc = json.loads(json.dumps(scenario_to_dict(sc)))
    back = scenario_from_dict(doc)
    assert back == sc
    assert run(back).records == run(sc).records


def test_scenario_with_topology_file(tmp_path):
    (tmp_path / "k4.topo").write_text("node 0\nnode 1\nnode 2\nnode 3\n" + "".join(
        f"link {u} {v} 1\n" for u in range(4) for v in range(u + 1, 4)
    ))
    doc = {"topology": "k4.topo", "flows": [{"src": 0, "dst": 3, "interval": 10, "count": 3}],
           "failures": [{"component": {"link": [0, 3]}, "down_at": 0}], "mode": "mrc"}
    sc = scenario_from_dict(doc, str(tmp_path))
    assert sc.topology == complete(4)
    assert run(sc).summary["delivered"] == 3


def test_random_scenarios_are_loop_free():
    rng = random.Random(99)
    for _ in range(10):
        g = random_biconnected(rng, 3, 10)
        res = run(random_scenario(rng, g, 3, rng.choice([EMRC, MRC])))
        assert loop_violations(res) == []
        assert "LoopDetected" not in res.summary["drop_reasons"]
        assert set(res.summary["drop_reasons"]) <= {d.value for d in DropReason}
