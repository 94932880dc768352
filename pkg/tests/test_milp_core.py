import itertools
import random

import numpy as np
import pytest

from fsndesign import Network
from fsndesign.milp_core import (
    EQUAL,
    GREATER,
    LESS,
    LinearModel,
    ModelError,
    dual_objective,
    solve_ilp,
    solve_lp,
)
from fsndesign.pricing_fsn import separate_subtours


def test_one_row_lp_dual():
    m = LinearModel()
    x = m.add_variable("x", obj=1.0)
    m.add_constraint([(x, 1.0)], GREATER, 3.0)
    sol = solve_lp(m)
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(3.0)
    assert sol.duals[0] == pytest.approx(1.0)


def test_infeasible_lp():
    m = LinearModel()
    x = m.add_variable("x", lb=0.0)
    m.add_constraint([(x, 1.0)], LESS, -1.0)
    assert solve_lp(m).status == "infeasible"


def test_unbounded_lp():
    m = LinearModel()
    m.add_variable("x", obj=-1.0)
    assert solve_lp(m).status == "unbounded"


def test_binary_cover_ilp():
    m = LinearModel()
    x = m.add_variable("x", ub=1.0, obj=1.0, integer=True)
    y = m.add_variable("y", ub=1.0, obj=1.0, integer=True)
    m.add_constraint([(x, 1.0), (y, 1.0)], GREATER, 1.0)
    res = solve_ilp(m)
    assert res.status == "optimal"
    assert res.objective == pytest.approx(1.0)


def test_knapsack_ilp():
    m = LinearModel()
    a = m.add_variable("a", ub=1.0, obj=-3.0, integer=True)
    b = m.add_variable("b", ub=1.0, obj=-2.0, integer=True)
    m.add_constraint([(a, 1.0), (b, 1.0)], LESS, 1.0)
    res = solve_ilp(m)
    assert res.objective == pytest.approx(-3.0)


def test_lazy_cuts_remove_cycle():
    # reward selecting edges of a square; acyclicity only via lazy cuts
    net = Network(
        ["a", "b", "c", "d"],
        [("a", "b", 1.0), ("b", "c", 1.0), ("c", "d", 1.0), ("d", "a", 1.0)],
    )
    m = LinearModel()
    var = {e: m.add_variable(f"e{i}", ub=1.0, obj=-1.0, integer=True)
           for i, e in enumerate(net.edges)}
    fired = []

    def separator(x):
        selected = {e for e, j in var.items() if x[j] > 0.5}
        cuts = separate_subtours(net, selected)
        fired.extend(cuts)
        rows = []
        for nodes in cuts:
            coeffs = [(var[e], 1.0) for e in net.edges if e[0] in nodes and e[1] in nodes]
            rows.append((coeffs, LESS, float(len(nodes) - 1)))
        return rows

    res = solve_ilp(m, separator=separator)
    assert res.status == "optimal"
    assert len(fired) >= 1
    assert res.objective == pytest.approx(-3.0)
    selected = {e for e, j in var.items() if res.x[j] > 0.5}
    assert not separate_subtours(net, selected)


def _random_binary_model(rng):
    n = rng.randint(1, 5)
    n_rows = rng.randint(0, 4)
    m = LinearModel()
    c = [rng.randint(-5, 5) for _ in range(n)]
    for j in range(n):
        m.add_variable(f"v{j}", ub=1.0, obj=float(c[j]), integer=True)
    rows = []
    for _ in range(n_rows):
        coeffs = [(j, float(rng.randint(-3, 3))) for j in range(n)]
        sense = rng.choice([LESS, GREATER])
        rhs = float(rng.randint(-2, 4))
        m.add_constraint(coeffs, sense, rhs)
        rows.append((coeffs, sense, rhs))
    return m, c, rows


def _enumerate_optimum(n, c, rows):
    best = None
    for point in itertools.product([0, 1], repeat=n):
        ok = True
        for coeffs, sense, rhs in rows:
            lhs = sum(a * point[j] for j, a in coeffs)
            if sense == LESS and lhs > rhs + 1e-9:
                ok = False
            if sense == GREATER and lhs < rhs - 1e-9:
                ok = False
        if ok:
            val = sum(cj * pj for cj, pj in zip(c, point))
            best = val if best is None or val < best else best
    return best


def test_lp_vs_ilp_bound_sandwich_random():
    rng = random.Random(99)
    for _ in range(80):
        m, c, rows = _random_binary_model(rng)
        expected = _enumerate_optimum(len(c), c, rows)
        ilp = solve_ilp(m)
        if expected is None:
            assert ilp.status == "infeasible"
            continue
        assert ilp.status == "optimal"
        assert ilp.objective == pytest.approx(expected)
        lp = solve_lp(m)
        assert lp.status == "optimal"
        assert lp.objective <= ilp.objective + 1e-6


def test_strong_duality_random():
    rng = random.Random(4)
    checked = 0
    for _ in range(60):
        n = rng.randint(1, 4)
        m = LinearModel()
        for j in range(n):
            ub = rng.choice([1.0, 5.0, float("inf")])
            m.add_variable(f"v{j}", ub=ub, obj=float(rng.randint(-4, 4)))
        for _ in range(rng.randint(1, 4)):
            coeffs = [(j, float(rng.randint(-3, 3))) for j in range(n)]
            m.add_constraint(coeffs, rng.choice([LESS, GREATER, EQUAL]), float(rng.randint(-2, 4)))
        sol = solve_lp(m)
        if sol.status != "optimal":
            continue
        checked += 1
        assert dual_objective(m, sol) == pytest.approx(sol.objective, abs=1e-6)
    assert checked >= 20


def test_resolve_deterministic():
    m = LinearModel()
    x = m.add_variable("x", ub=10.0, obj=2.0)
    y = m.add_variable("y", ub=10.0, obj=3.0)
    m.add_constraint([(x, 1.0), (y, 2.0)], GREATER, 7.0)
    first = solve_lp(m)
    for _ in range(3):
        again = solve_lp(m)
        assert again.objective == first.objective
        assert np.array_equal(again.x, first.x)


def test_model_validation():
    m = LinearModel()
    with pytest.raises(ModelError):
        m.add_variable("bad", obj=float("nan"))
    x = m.add_variable("x")
    with pytest.raises(ModelError):
        m.add_constraint([(x, float("nan"))], LESS, 1.0)
    with pytest.raises(ModelError):
        m.add_constraint([(5, 1.0)], LESS, 1.0)
    with pytest.raises(ModelError):
        m.add_constraint([(x, 1.0)], "<", 1.0)


def test_ilp_requires_bounded_integers():
    m = LinearModel()
    m.add_variable("x", integer=True)  # unbounded above
    with pytest.raises(ModelError):
        solve_ilp(m)


def test_empty_model_rejected():
    with pytest.raises(ModelError):
        solve_lp(LinearModel())


def test_objective_offset_carried():
    m = LinearModel()
    m.objective_offset = 2.5
    x = m.add_variable("x", ub=1.0, obj=1.0, integer=True)
    m.add_constraint([(x, 1.0)], GREATER, 1.0)
    assert solve_lp(m).objective == pytest.approx(3.5)
    assert solve_ilp(m).objective == pytest.approx(3.5)


def test_lp_text_dump():
    m = LinearModel()
    x = m.add_variable("x", ub=1.0, obj=1.0, integer=True)
    m.add_constraint([(x, 1.0)], GREATER, 1.0, name="cover")
    text = m.lp_text()
    assert "Minimize" in text and "cover:" in text and "Generals" in text
