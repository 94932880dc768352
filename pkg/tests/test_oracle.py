import pytest

from fsndesign import Network, Request, SolverConfig, oracle_min_coloring, oracle_optimum
from fsndesign.oracle import OracleInfeasibleError, OracleLimitError


def test_min_coloring_star_conflicts(star_fsn):
    assert oracle_min_coloring(list(star_fsn.served), set(star_fsn.conflicts)) == 4


def test_min_coloring_edgeless():
    assert oracle_min_coloring(list(range(9)), set()) == 1


def test_min_coloring_complete():
    edges = {(i, j) for i in range(5) for j in range(i + 1, 5)}
    assert oracle_min_coloring(list(range(5)), edges) == 5


def test_min_coloring_five_cycle():
    edges = {(i, (i + 1) % 5) for i in range(5)}
    assert oracle_min_coloring(list(range(5)), edges) == 3


def test_min_coloring_size_limit():
    with pytest.raises(OracleLimitError):
        oracle_min_coloring(list(range(17)), set())


def test_optimum_two_node():
    net = Network(["a", "b"], [("a", "b", 1.0)])
    assert oracle_optimum(net, [Request(0, "a", "b")], SolverConfig(max_fsn=1)) == 1


def test_optimum_opposite_directions_share():
    net = Network(["v1", "v2", "v3"], [("v1", "v2", 1.0), ("v2", "v3", 1.0)])
    reqs = [Request(0, "v1", "v3"), Request(1, "v3", "v1")]
    assert oracle_optimum(net, reqs, SolverConfig(max_fsn=1)) == 1


def test_optimum_shared_filtered_link():
    net = Network(["v1", "v2", "v3"], [("v1", "v2", 1.0), ("v2", "v3", 1.0)])
    reqs = [Request(0, "v1", "v3"), Request(1, "v2", "v3")]
    assert oracle_optimum(net, reqs, SolverConfig(max_fsn=1)) == 2


def test_optimum_two_subnets_can_help():
    # identical requests clash on one subnet; on a 4-cycle two disjoint
    # subnets give each its own path
    net = Network(
        ["a", "b", "c", "d"],
        [("a", "b", 1.0), ("b", "c", 1.0), ("c", "d", 1.0), ("d", "a", 1.0)],
    )
    reqs = [Request(0, "a", "c"), Request(1, "a", "c")]
    one = oracle_optimum(net, reqs, SolverConfig(max_fsn=1))
    two = oracle_optimum(net, reqs, SolverConfig(max_fsn=2))
    assert one == 2
    assert two == 1


def test_optimum_infeasible_reach():
    net = Network(["a", "b", "c"], [("a", "b", 900.0), ("b", "c", 900.0)])
    reqs = [Request(0, "a", "c")]
    with pytest.raises(OracleInfeasibleError):
        oracle_optimum(net, reqs, SolverConfig(max_fsn=1, reach_km=1000.0))


def test_optimum_size_limits():
    nodes = [f"n{i}" for i in range(7)]
    net = Network(nodes, [(nodes[i], nodes[i + 1], 1.0) for i in range(6)])
    with pytest.raises(OracleLimitError):
        oracle_optimum(net, [Request(0, "n0", "n1")], SolverConfig(max_fsn=1))
    small = Network(["a", "b"], [("a", "b", 1.0)])
    with pytest.raises(OracleLimitError):
        oracle_optimum(small, [Request(0, "a", "b")], SolverConfig(max_fsn=3))
    many = [Request(i, "a", "b") for i in range(9)]
    with pytest.raises(OracleLimitError):
        oracle_optimum(small, many, SolverConfig(max_fsn=1))
