import random

import pytest

from fsndesign import (
    Network,
    Request,
    SolverConfig,
    initial_solution,
    run,
    welsh_powell,
)
from fsndesign.master import DesignError


def test_welsh_powell_edgeless():
    colors = welsh_powell(range(7), [])
    assert set(colors) == set(range(7))
    assert max(colors.values()) == 0


def test_welsh_powell_complete_graph():
    edges = [(i, j) for i in range(4) for j in range(i + 1, 4)]
    colors = welsh_powell(range(4), edges)
    assert len(set(colors.values())) == 4


def test_welsh_powell_star():
    edges = [(0, i) for i in range(1, 6)]
    colors = welsh_powell(range(6), edges)
    assert len(set(colors.values())) == 2
    assert colors[0] == 0  # hub is processed first


def test_welsh_powell_five_cycle():
    edges = [(i, (i + 1) % 5) for i in range(5)]
    colors = welsh_powell(range(5), edges)
    assert len(set(colors.values())) == 3


def test_welsh_powell_proper_and_bounded():
    rng = random.Random(3)
    for _ in range(50):
        n = rng.randint(1, 30)
        edges = [
            (i, j)
            for i in range(n)
            for j in range(i + 1, n)
            if rng.random() < 0.3
        ]
        colors = welsh_powell(range(n), edges)
        for u, v in edges:
            assert colors[u] != colors[v]
        degree = {v: 0 for v in range(n)}
        for u, v in edges:
            degree[u] += 1
            degree[v] += 1
        max_deg = max(degree.values(), default=0)
        assert len(set(colors.values())) <= max_deg + 1


def test_initial_solution_star(star_net, star_reqs):
    cfg = SolverConfig(max_fsn=1)
    fsn, colors, skipped = initial_solution(star_net, star_reqs, cfg)
    assert skipped == []
    assert fsn.served == tuple(range(7))
    assert len(colors) <= 4
    # the induced coloring is proper
    color_of = {}
    for idx, col in enumerate(colors):
        for k in col.members:
            color_of[k] = idx
    for k, kp in fsn.conflicts:
        assert color_of[k] != color_of[kp]


def test_initial_solution_single_request():
    net = Network(["a", "b"], [("a", "b", 3.0)])
    cfg = SolverConfig()
    fsn, colors, skipped = initial_solution(net, [Request(0, "a", "b")], cfg)
    assert fsn.served == (0,)
    assert len(colors) == 1
    assert colors[0].members == {0}
    assert skipped == []


def test_initial_solution_skips_unreachable():
    net = Network(["a", "b", "c"], [("a", "b", 900.0), ("b", "c", 900.0)])
    reqs = [Request(0, "a", "c"), Request(1, "a", "b")]
    cfg = SolverConfig(reach_km=1000.0)
    fsn, colors, skipped = initial_solution(net, reqs, cfg)
    assert skipped == [0]
    assert fsn.served == (1,)


def test_initial_solution_picks_shortest_tree():
    # triangle: the 5 km edge is left out of the spanning tree
    net = Network(
        ["a", "b", "c"],
        [("a", "b", 1.0), ("b", "c", 2.0), ("a", "c", 5.0)],
    )
    cfg = SolverConfig()
    fsn, _, _ = initial_solution(net, [Request(0, "a", "b")], cfg)
    assert fsn.tree_edges == {("a", "b"), ("b", "c")}


def test_run_rejects_disconnected_network():
    net = Network(["a", "b", "c", "d"], [("a", "b", 1.0), ("c", "d", 1.0)])
    with pytest.raises(DesignError, match="disconnected"):
        run(net, [Request(0, "a", "b")], SolverConfig())


def test_run_star_regression(star_net, star_reqs):
    cfg = SolverConfig(max_fsn=1, time_limit_s=120.0, max_cg_iterations=300)
    design, cg = run(star_net, star_reqs, cfg)
    assert design.wavelengths == 4
    assert design.z_lp == pytest.approx(4.0)
    assert design.epsilon == pytest.approx(0.0)
    assert design.certified
    assert cg.termination == "optimal"
    # serving and coloring cover all requests exactly once
    assert set(design.serving) == set(range(7))
    assert set(design.wavelength_assignment) == set(range(7))


def test_run_iteration_limit_flags_uncertified(star_net, star_reqs):
    cfg = SolverConfig(max_fsn=1, max_cg_iterations=2, time_limit_s=60.0)
    design, cg = run(star_net, star_reqs, cfg)
    assert cg.termination == "iteration_limit"
    assert not design.certified
    assert design.wavelengths >= 4  # still a valid incumbent
    assert len(cg.records) == 2


def test_run_deterministic(star_net, star_reqs):
    cfg = SolverConfig(max_fsn=1, time_limit_s=120.0, max_cg_iterations=50)
    design1, cg1 = run(star_net, star_reqs, cfg)
    design2, cg2 = run(star_net, star_reqs, cfg)
    assert design1.wavelengths == design2.wavelengths
    assert cg1.lp_values() == cg2.lp_values()
    assert [r.pricer for r in cg1.records] == [r.pricer for r in cg2.records]
    assert [r.column_index for r in cg1.records] == [r.column_index for r in cg2.records]


def test_log_export(star_net, star_reqs):
    import json

    cfg = SolverConfig(max_fsn=1, max_cg_iterations=3, time_limit_s=60.0)
    _, cg = run(star_net, star_reqs, cfg)
    payload = json.loads(cg.to_json())
    assert payload["iterations"][0]["iteration"] == 1
    assert "lp_value" in payload["iterations"][0]
    assert payload["termination"] in {"optimal", "iteration_limit", "time_limit"}
