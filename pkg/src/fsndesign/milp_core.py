"""Sparse linear models with exact LP and ILP solution.

A thin exact layer over HiGHS (via scipy): LP solves return dual values in
the standard convention for minimization (>= rows nonnegative, <= rows
nonpositive, duals are d(objective)/d(rhs)), and ILP solves support a
lazy-cut separator that is consulted on every optimal integer candidate
until it returns no further cuts.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

LESS = "<="
GREATER = ">="
EQUAL = "=="

RowSpec = tuple[Sequence[tuple[int, float]], str, float]
Separator = Callable[[np.ndarray], list[RowSpec]]


class ModelError(ValueError):
    """Raised for ill-formed models (bad indices, NaN coefficients...)."""


@dataclass
class _Variable:
    name: str
    lb: float
    ub: float
    obj: float
    integer: bool


class LinearModel:
    """A minimization model built incrementally from variables and rows."""

    def __init__(self, name: str = "model"):
        self.name = name
        self.variables: list[_Variable] = []
        self.row_coeffs: list[list[tuple[int, float]]] = []
        self.row_sense: list[str] = []
        self.row_rhs: list[float] = []
        self.row_names: list[str] = []
        self.objective_offset: float = 0.0

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    @property
    def num_constraints(self) -> int:
        return len(self.row_coeffs)

    def add_variable(
        self,
        name: str,
        lb: float = 0.0,
        ub: float = math.inf,
        obj: float = 0.0,
        integer: bool = False,
    ) -> int:
        if math.isnan(obj) or math.isnan(lb) or math.isnan(ub):
            raise ModelError(f"variable {name}: NaN in bounds or objective")
        if lb > ub:
            raise ModelError(f"variable {name}: lb {lb} > ub {ub}")
        self.variables.append(_Variable(name, lb, ub, obj, integer))
        return len(self.variables) - 1

    def add_constraint(
        self,
        coeffs: Iterable[tuple[int, float]],
        sense: str,
        rhs: float,
        name: str = "",
    ) -> int:
        if sense not in (LESS, GREATER, EQUAL):
            raise ModelError(f"bad sense {sense!r}")
        if math.isnan(rhs):
            raise ModelError(f"row {name or self.num_constraints}: NaN rhs")
        row = []
        for j, a in coeffs:
            if not 0 <= j < len(self.variables):
                raise ModelError(f"row {name or self.num_constraints}: no variable {j}")
            if math.isnan(a):
                raise ModelError(f"row {name or self.num_constraints}: NaN coefficient")
            if a != 0.0:
                row.append((j, float(a)))
        self.row_coeffs.append(row)
        self.row_sense.append(sense)
        self.row_rhs.append(float(rhs))
        self.row_names.append(name or f"r{len(self.row_coeffs) - 1}")
        return len(self.row_coeffs) - 1

    def _matrix(self) -> sp.csr_matrix:
        data, ri, ci = [], [], []
        for i, row in enumerate(self.row_coeffs):
            for j, a in row:
                ri.append(i)
                ci.append(j)
                data.append(a)
        return sp.csr_matrix(
            (data, (ri, ci)), shape=(self.num_constraints, self.num_variables)
        )

    def lp_text(self) -> str:
        """Model dump in LP text format, for cross-checks with other solvers."""

        def term(j: int, a: float) -> str:
            return f"{'+' if a >= 0 else '-'} {abs(a):.12g} {self.variables[j].name}"

        out = ["Minimize", " obj: " + " ".join(
            term(j, v.obj) for j, v in enumerate(self.variables) if v.obj
        )]
        out.append("Subject To")
        sense_txt = {LESS: "<=", GREATER: ">=", EQUAL: "="}
        for i, row in enumerate(self.row_coeffs):
            lhs = " ".join(term(j, a) for j, a in row) or "0 x0"
            out.append(f" {self.row_names[i]}: {lhs} {sense_txt[self.row_sense[i]]} {self.row_rhs[i]:.12g}")
        out.append("Bounds")
        for v in self.variables:
            ub = "+inf" if math.isinf(v.ub) else f"{v.ub:.12g}"
            out.append(f" {v.lb:.12g} <= {v.name} <= {ub}")
        integers = [v.name for v in self.variables if v.integer]
        if integers:
            out.append("Generals")
            out.append(" " + " ".join(integers))
        out.append("End")
        return "\n".join(out) + "\n"


@dataclass
class LpSolution:
    status: str  # optimal | infeasible | unbounded | limit
    objective: float | None
    x: np.ndarray | None
    duals: np.ndarray | None
    reduced_costs: np.ndarray | None
    message: str = ""


@dataclass
class IlpSolution:
    status: str  # optimal | infeasible | unbounded | limit
    objective: float | None
    x: np.ndarray | None
    bound: float | None
    message: str = ""
    cuts_added: int = 0


_LP_STATUS = {0: "optimal", 1: "limit", 2: "infeasible", 3: "unbounded", 4: "limit"}


def solve_lp(model: LinearModel) -> LpSolution:
    """Solve the continuous relaxation; integrality flags are ignored."""
    if model.num_variables == 0:
        raise ModelError("model has no variables")
    c = np.array([v.obj for v in model.variables])
    bounds = [(v.lb, None if math.isinf(v.ub) else v.ub) for v in model.variables]
    mat = model._matrix()

    ub_rows: list[int] = []
    ub_sign: list[float] = []
    eq_rows: list[int] = []
    for i, s in enumerate(model.row_sense):
        if s == EQUAL:
            eq_rows.append(i)
        else:
            ub_rows.append(i)
            ub_sign.append(1.0 if s == LESS else -1.0)
    rhs = np.array(model.row_rhs)

    a_ub = b_ub = a_eq = b_eq = None
    if ub_rows:
        sign = sp.diags(ub_sign)
        a_ub = sign @ mat[ub_rows, :]
        b_ub = np.array(ub_sign) * rhs[ub_rows]
    if eq_rows:
        a_eq = mat[eq_rows, :]
        b_eq = rhs[eq_rows]

    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs")
    status = _LP_STATUS.get(res.status, "limit")
    if status != "optimal":
        return LpSolution(status, None, None, None, None, res.message)

    duals = np.zeros(model.num_constraints)
    if ub_rows:
        # dual of a >= row is the negated dual of its negated <= form
        duals[ub_rows] = np.array(ub_sign) * res.ineqlin.marginals
    if eq_rows:
        duals[eq_rows] = res.eqlin.marginals
    reduced = np.asarray(res.lower.marginals) + np.asarray(res.upper.marginals)
    return LpSolution(
        "optimal",
        float(res.fun) + model.objective_offset,
        np.asarray(res.x, dtype=float),
        duals,
        reduced,
        res.message,
    )


def dual_objective(model: LinearModel, sol: LpSolution) -> float:
    """Value of the dual solution: rhs-weighted duals plus bound terms."""
    if sol.status != "optimal":
        raise ModelError("dual objective requires an optimal solution")
    assert sol.duals is not None and sol.reduced_costs is not None
    val = float(np.dot(sol.duals, np.array(model.row_rhs)))
    for j, v in enumerate(model.variables):
        rc = sol.reduced_costs[j]
        if rc > 0 and v.lb != 0.0:
            val += rc * v.lb
        elif rc < 0 and not math.isinf(v.ub):
            val += rc * v.ub
    return val + model.objective_offset


def _milp_once(model: LinearModel, time_limit: float | None) -> tuple[str, float | None, np.ndarray | None, float | None, str]:
    c = np.array([v.obj for v in model.variables])
    integrality = np.array([1 if v.integer else 0 for v in model.variables])
    lbs = np.array([v.lb for v in model.variables])
    ubs = np.array([v.ub for v in model.variables])
    constraints = []
    if model.num_constraints:
        lo = np.full(model.num_constraints, -np.inf)
        hi = np.full(model.num_constraints, np.inf)
        rhs = np.array(model.row_rhs)
        for i, s in enumerate(model.row_sense):
            if s in (GREATER, EQUAL):
                lo[i] = rhs[i]
            if s in (LESS, EQUAL):
                hi[i] = rhs[i]
        constraints = [LinearConstraint(model._matrix(), lo, hi)]
    options: dict = {"mip_rel_gap": 0.0}
    if time_limit is not None:
        options["time_limit"] = max(time_limit, 0.01)
    res = milp(
        c,
        constraints=constraints,
        integrality=integrality,
        bounds=Bounds(lbs, ubs),
        options=options,
    )
    status = _LP_STATUS.get(res.status, "limit")
    obj = float(res.fun) + model.objective_offset if res.x is not None else None
    x = np.asarray(res.x, dtype=float) if res.x is not None else None
    bound = None
    if res.mip_dual_bound is not None and math.isfinite(res.mip_dual_bound):
        bound = float(res.mip_dual_bound) + model.objective_offset
    return status, obj, x, bound, res.message or ""


def solve_ilp(
    model: LinearModel,
    separator: Separator | None = None,
    time_limit: float | None = None,
) -> IlpSolution:
    """Solve to integer optimality, lazily adding separator cuts.

    After each optimal solve the separator is handed the rounded integer
    candidate; returned cut rows are appended to the model and the solve
    repeats.  The candidate is accepted only once the separator is silent.
    """
    for v in model.variables:
        if v.integer and (math.isinf(v.lb) or math.isinf(v.ub)):
            raise ModelError(f"integer variable {v.name} must be bounded")
    deadline = None if time_limit is None else time.monotonic() + time_limit
    cuts_added = 0
    while True:
        remaining = None if deadline is None else deadline - time.monotonic()
        if remaining is not None and remaining <= 0:
            return IlpSolution("limit", None, None, None, "time limit before solve", cuts_added)
        status, obj, x, bound, msg = _milp_once(model, remaining)
        if status != "optimal" or separator is None or x is None:
            return IlpSolution(status, obj, x, bound, msg, cuts_added)
        candidate = np.round(x)
        cuts = separator(candidate)
        if not cuts:
            return IlpSolution(status, obj, x, bound, msg, cuts_added)
        for coeffs, sense, rhs in cuts:
            model.add_constraint(coeffs, sense, rhs, name=f"cut{cuts_added}")
            cuts_added += 1
