from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emrc.configgen import (
    Configuration,
    ConfigurationSet,
    WeightClass,
    backbone,
    check_invariants,
    configset_from_json,
    configset_to_json,
    coverage_report,
    generate_configs,
    is_valid_config,
    restricted_weight,
)
from emrc.errors import DisconnectedBackbone, InsufficientConfigurations, NotBiconnected
from emrc.fixtures import complete, figure3_graph, path_graph, ring
from emrc.oracle import oracle_problems, oracle_validate

from helpers import brute_feasible, random_biconnected

# Minimum feasible n per topology, found by exhaustive assignment search
# (helpers.brute_feasible) and frozen here.
BRUTE_MIN_N = {"ring4": 4, "k4": 2}


def test_restricted_weight_exceeds_every_path():
    g = figure3_graph(backup_weight=2)
    w_r = restricted_weight(g)
    assert w_r == 1 + sum(g.weights.values())
    assert w_r > sum(w for (u, v), w in g.weights.items() if u < v)


def test_normal_configuration():
    g = complete(3)
    c = Configuration.normal(g)
    assert set(c.classes.values()) == {WeightClass.NORMAL}
    assert c.cost(0, 1) == 1
    assert is_valid_config(g, c).valid


def test_ring_isolating_opposite_nodes_is_invalid():
    g = ring(4)
    c = Configuration.build(g, 1, isolated_nodes={0, 2})
    report = is_valid_config(g, c)
    assert not report.valid
    assert (1, 3) in report.violations


def test_ring_isolating_one_node_is_valid():
    g = ring(4)
    c = Configuration.build(g, 1, isolated_nodes={0})
    assert c.link_class(3, 0) is WeightClass.RESTRICTED
    assert c.link_class(0, 1) is WeightClass.RESTRICTED
    assert c.cost(0, 1) == c.w_r
    assert is_valid_config(g, c).valid
    assert check_invariants(c) == []


def test_isolated_link_has_no_cost():
    c = Configuration.build(ring(4), 1, isolated_nodes={0}, isolated_links={(1, 0)})
    assert c.cost(0, 1) is None and c.cost(1, 0) is None
    assert c.isolates_link(1, 0)


def test_check_invariants_flags_co_isolated_restricted_link():
    c = Configuration.build(complete(4), 1, isolated_nodes={0, 1})
    assert any("two isolated nodes" in p for p in check_invariants(c))


def test_check_invariants_flags_fully_cut_node():
    c = Configuration.build(ring(4), 1, isolated_nodes={0}, isolated_links={(0, 1), (0, 3)})
    assert any("no restricted link" in p for p in check_invariants(c))


def test_backbone():
    c = Configuration.build(ring(4), 1, isolated_nodes={0})
    bb = backbone(c)
    assert bb.nodes == {1, 2, 3}
    assert bb.links == {(1, 2), (2, 3)}
    with pytest.raises(DisconnectedBackbone):
        backbone(Configuration.build(ring(4), 1, isolated_nodes={0, 2}))


def test_coverage_flags_missing_and_duplicates():
    g = complete(3)
    c1 = Configuration.build(g, 1, isolated_nodes={0}, isolated_links={(0, 1)})
    c2 = Configuration.build(g, 2, isolated_nodes={0}, isolated_links={(1, 2)})
    cs = ConfigurationSet((Configuration.normal(g), c1, c2), restricted_weight(g))
    rep = coverage_report(cs, g)
    assert rep.duplicate_nodes == [0]
    assert rep.uncovered_nodes == [1, 2]
    assert rep.uncovered_links == [(0, 2)]
    assert not rep.ok


def test_oracle_rejects_normal_only_set():
    g = complete(3)
    cs = ConfigurationSet((Configuration.normal(g),), restricted_weight(g))
    assert not oracle_validate(g, cs)
    assert "no backup configurations" in oracle_problems(g, cs)


def test_oracle_rejects_invalid_configuration():
    g = ring(4)
    w_r = restricted_weight(g)
    bad = Configuration.build(g, 1, isolated_nodes={0, 2}, w_r=w_r)
    cs = ConfigurationSet((Configuration.normal(g, w_r), bad), w_r)
    assert any("no valid path 1->3" in p for p in oracle_problems(g, cs))


# -- generator ---------------------------------------------------------------------


def test_ring4_needs_four_configurations():
    g = ring(4)
    for n in (1, 2, 3):
        with pytest.raises(InsufficientConfigurations):
            generate_configs(g, n)
    cs = generate_configs(g, 4)
    assert oracle_validate(g, cs)
    assert generate_configs(g, "auto").n == BRUTE_MIN_N["ring4"]
    assert [(sorted(c.isolated_nodes), sorted(c.isolated_links)) for c in cs.backups()] == [
        ([0], [(0, 1)]),
        ([1], [(1, 2)]),
        ([2], [(2, 3)]),
        ([3], [(0, 3)]),
    ]


def test_k4_two_configurations():
    g = complete(4)
    cs = generate_configs(g, 2)
    assert oracle_validate(g, cs)
    assert [sorted(c.isolated_nodes) for c in cs.backups()] == [[0, 2], [1, 3]]
    assert generate_configs(g, "auto").n == BRUTE_MIN_N["k4"]


@pytest.mark.parametrize("name, g, n_min", [("ring4", ring(4), 4), ("k4", complete(4), 2)])
def test_brute_force_minimum(name, g, n_min):
    assert BRUTE_MIN_N[name] == n_min
    assert not brute_feasible(g, n_min - 1)
    assert brute_feasible(g, n_min)


def test_not_biconnected_rejected():
    with pytest.raises(NotBiconnected):
        generate_configs(path_graph(3))


def test_bad_n_rejected():
    with pytest.raises(ValueError):
        generate_configs(ring(4), 0)


def test_generation_is_deterministic():
    g = figure3_graph()
    assert generate_configs(g) == generate_configs(g)
    assert generate_configs(g, seed=3) == generate_configs(g, seed=3)


def test_json_round_trip():
    g = figure3_graph(2)
    cs = generate_configs(g)
    back = configset_from_json(configset_to_json(cs), g)
    assert back == cs
    assert oracle_validate(g, back)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_success_is_monotone_in_n(seed):
    g = random_biconnected(random.Random(seed), 3, 8)
    n_auto = generate_configs(g).n
    for n in range(n_auto, n_auto + 3):
        cs = generate_configs(g, n)
        assert cs.n == n
        assert oracle_validate(g, cs)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 5))
def test_generated_sets_satisfy_invariants(seed, tie_seed):
    g = random_biconnected(random.Random(seed), 3, 9)
    cs = generate_configs(g, seed=tie_seed)
    assert cs[0] == Configuration.normal(g, cs.w_r)
    for c in cs:
        assert check_invariants(c) == []
        assert is_valid_config(g, c).valid
        backbone(c)
    assert coverage_report(cs, g).ok
    assert oracle_validate(g, cs)
