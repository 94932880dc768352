"""Restricted master problem: column pool, RMP construction, duals, finalization.

The master selects sub-network columns (which serve requests and occupy
directed links) and wavelength columns (sets of requests sharing one
color), minimizing the number of wavelength columns subject to coverage,
pairwise link disjointness, an optional cap on the number of sub-networks,
and the conflict coupling between the two column families.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import milp_core
from .fsn_core import FsnConfig, LoadReport, link_loads, pair_key, verify_fsn_config
from .milp_core import EQUAL, GREATER, LESS, LinearModel
from .topology import Link, Network, Request, SolverConfig


class DesignError(Exception):
    """Structured infeasibility or inconsistency report."""


class UncoveredRequestError(DesignError):
    def __init__(self, family: str, request_ids: list[int]):
        self.family = family
        self.request_ids = request_ids
        super().__init__(
            f"requests {request_ids} appear in no column of the "
            f"{family} family; the master problem is infeasible"
        )


@dataclass(frozen=True)
class WavelengthConfig:
    """One wavelength column: the set of requests sharing a color."""

    members: frozenset[int]

    def __post_init__(self) -> None:
        if not self.members:
            raise ValueError("a wavelength column must be non-empty")


class ColumnPool:
    """De-duplicated columns of both families, verified on entry."""

    def __init__(self, net: Network, requests: list[Request], reach_km: float):
        self.net = net
        self.requests = requests
        self.reach_km = reach_km
        self.fsn_columns: list[FsnConfig] = []
        self.color_columns: list[WavelengthConfig] = []
        self._fsn_keys: set = set()
        self._color_keys: set = set()

    def add_fsn(self, cfg: FsnConfig) -> bool:
        """Add a sub-network column; False when an identical one is pooled."""
        key = cfg.signature()
        if key in self._fsn_keys:
            return False
        if not cfg.served:
            raise DesignError("rejected sub-network column serving no request")
        violations = verify_fsn_config(cfg, self.net, self.requests, self.reach_km)
        if violations:
            raise DesignError(f"rejected sub-network column: {violations}")
        self._fsn_keys.add(key)
        self.fsn_columns.append(cfg)
        return True

    def add_color(self, col: WavelengthConfig) -> bool:
        if col.members in self._color_keys:
            return False
        known = {r.id for r in self.requests}
        if not col.members <= known:
            raise DesignError(f"wavelength column names unknown requests {col.members - known}")
        self._color_keys.add(col.members)
        self.color_columns.append(col)
        return True


@dataclass
class Duals:
    """Dual prices of the master rows, in the standard signed convention.

    Coverage rows (per request, and per-request color rows) are >= rows
    with nonnegative duals; link, sub-network-count, and pair rows are <=
    rows with nonpositive duals.
    """

    u2: np.ndarray  # per request, coverage by sub-networks
    u3: dict[Link, float]  # per directed link, disjointness
    u4: float  # sub-network count cap (0.0 when the cap is absent)
    u5: dict[tuple[int, int], float]  # per unordered request pair
    u6: np.ndarray  # per request, coverage by wavelength columns


@dataclass
class RmpLayout:
    """Variable/row bookkeeping of one built RMP."""

    z_vars: list[int]
    x_vars: list[int]
    row_demand: dict[int, int]
    row_link: dict[Link, int]
    row_tree: int | None
    row_pair: dict[tuple[int, int], int]
    row_color: dict[int, int]


def build_rmp(
    pool: ColumnPool,
    net: Network,
    requests: list[Request],
    cfg: SolverConfig,
    integer: bool = False,
) -> tuple[LinearModel, RmpLayout]:
    """Build the (restricted) master over the pooled columns.

    Raises :class:`UncoveredRequestError` before solving when some request
    appears in no column of one family, which would make the model
    trivially infeasible.
    """
    uncovered_fsn = [
        r.id for r in requests if not any(r.id in c.served for c in pool.fsn_columns)
    ]
    if uncovered_fsn:
        raise UncoveredRequestError("sub-network coverage (per-request routing)", uncovered_fsn)
    uncovered_color = [
        r.id for r in requests if not any(r.id in c.members for c in pool.color_columns)
    ]
    if uncovered_color:
        raise UncoveredRequestError("wavelength coverage (per-request coloring)", uncovered_color)

    m = LinearModel("rmp")
    # the LP relaxation leaves columns unbounded above: upper bounds of 1
    # are implied at the optimum, and explicit ones would let pooled
    # columns sit at a bound with negative reduced cost, breaking the
    # pricing termination argument
    ub = 1.0 if integer else float("inf")
    z_vars = [
        m.add_variable(f"z{i}", lb=0.0, ub=ub, obj=0.0, integer=integer)
        for i in range(len(pool.fsn_columns))
    ]
    x_vars = [
        m.add_variable(f"x{i}", lb=0.0, ub=ub, obj=1.0, integer=integer)
        for i in range(len(pool.color_columns))
    ]

    row_demand: dict[int, int] = {}
    for r in requests:
        coeffs = [
            (z_vars[i], 1.0)
            for i, c in enumerate(pool.fsn_columns)
            if r.id in c.served
        ]
        row_demand[r.id] = m.add_constraint(coeffs, GREATER, 1.0, f"serve_k{r.id}")

    row_link: dict[Link, int] = {}
    for link in net.links:
        coeffs = [
            (z_vars[i], 1.0)
            for i, c in enumerate(pool.fsn_columns)
            if link in c.links
        ]
        row_link[link] = m.add_constraint(
            coeffs, LESS, 1.0, f"link_{link[0]}_{link[1]}"
        )

    row_tree = None
    if cfg.max_fsn is not None:
        row_tree = m.add_constraint(
            [(v, 1.0) for v in z_vars], LESS, float(cfg.max_fsn), "subnet_count"
        )

    row_pair: dict[tuple[int, int], int] = {}
    ids = sorted(r.id for r in requests)
    for k, kp in combinations(ids, 2):
        coeffs = [
            (x_vars[i], 1.0)
            for i, c in enumerate(pool.color_columns)
            if k in c.members and kp in c.members
        ]
        coeffs += [
            (z_vars[i], 1.0)
            for i, c in enumerate(pool.fsn_columns)
            if (k, kp) in c.conflicts
        ]
        row_pair[(k, kp)] = m.add_constraint(coeffs, LESS, 1.0, f"pair_{k}_{kp}")

    row_color: dict[int, int] = {}
    for r in requests:
        coeffs = [
            (x_vars[i], 1.0)
            for i, c in enumerate(pool.color_columns)
            if r.id in c.members
        ]
        row_color[r.id] = m.add_constraint(coeffs, GREATER, 1.0, f"color_k{r.id}")

    layout = RmpLayout(z_vars, x_vars, row_demand, row_link, row_tree, row_pair, row_color)
    return m, layout


def extract_duals(sol: milp_core.LpSolution, layout: RmpLayout) -> Duals:
    """Duals keyed by row family; requires an optimal LP solution."""
    if sol.status != "optimal":
        raise DesignError(f"cannot extract duals from a {sol.status} solution")
    assert sol.duals is not None
    d = sol.duals
    ids = sorted(layout.row_demand)
    u2 = np.zeros(max(ids) + 1 if ids else 0)
    u6 = np.zeros_like(u2)
    for k in ids:
        u2[k] = d[layout.row_demand[k]]
        u6[k] = d[layout.row_color[k]]
    u3 = {link: float(d[row]) for link, row in layout.row_link.items()}
    u4 = float(d[layout.row_tree]) if layout.row_tree is not None else 0.0
    u5 = {pair: float(d[row]) for pair, row in layout.row_pair.items()}
    return Duals(u2=u2, u3=u3, u4=u4, u5=u5, u6=u6)


def fsn_reduced_cost(cfg: FsnConfig, duals: Duals) -> float:
    """Reduced cost of a sub-network column under the given duals."""
    rc = -duals.u4
    rc -= sum(duals.u2[k] for k in cfg.served)
    rc -= sum(duals.u3[link] for link in cfg.links)
    rc -= sum(duals.u5[pair] for pair in cfg.conflicts)
    return rc


def color_reduced_cost(col: WavelengthConfig, duals: Duals) -> float:
    """Reduced cost of a wavelength column under the given duals."""
    rc = 1.0
    rc -= sum(duals.u6[k] for k in col.members)
    rc -= sum(duals.u5[pair_key(k, kp)] for k, kp in combinations(sorted(col.members), 2))
    return rc


def optimality_gap(wavelengths: int, z_lp: float) -> float:
    """Certified accuracy of an integer value against the LP bound."""
    if z_lp <= 0:
        return 0.0
    return (wavelengths - z_lp) / z_lp


@dataclass
class DesignSolution:
    """Final integer design: selected columns, assignment, bound and gap."""

    selected_fsns: list[FsnConfig]
    serving: dict[int, int]  # request id -> index into selected_fsns
    wavelength_assignment: dict[int, int]  # request id -> wavelength index
    wavelengths: int
    z_lp: float
    epsilon: float
    certified: bool
    loads: LoadReport
    ilp_objective: float
    selected_color_members: list[frozenset[int]] = field(default_factory=list)

    @property
    def W(self) -> int:
        return self.wavelengths


def _validate_design(
    design: DesignSolution, requests: list[Request], cfg: SolverConfig
) -> None:
    ids = {r.id for r in requests}
    if set(design.serving) != ids or set(design.wavelength_assignment) != ids:
        raise DesignError("post-processing left a request unserved or uncolored")
    if cfg.max_fsn is not None and len(design.selected_fsns) > cfg.max_fsn:
        raise DesignError("more sub-networks selected than allowed")
    seen: set[Link] = set()
    for c in design.selected_fsns:
        if seen & c.links:
            raise DesignError("selected sub-networks are not link disjoint")
        seen |= c.links
    for idx, c in enumerate(design.selected_fsns):
        for k, kp in c.conflicts:
            if design.serving.get(k) == idx and design.serving.get(kp) == idx:
                if design.wavelength_assignment[k] == design.wavelength_assignment[kp]:
                    raise DesignError(
                        f"conflicting requests {k},{kp} share wavelength "
                        f"{design.wavelength_assignment[k]}"
                    )


def finalize(
    pool: ColumnPool,
    net: Network,
    requests: list[Request],
    cfg: SolverConfig,
    z_lp: float,
    time_limit_s: float | None = None,
) -> DesignSolution:
    """Solve the integer RMP over the frozen pool and post-process.

    Multiply-served requests keep the lowest-index serving sub-network and
    the lowest-index wavelength column; empty color classes are dropped.
    """
    model, layout = build_rmp(pool, net, requests, cfg, integer=True)
    res = milp_core.solve_ilp(model, separator=None, time_limit=time_limit_s)
    if res.status == "infeasible":
        raise DesignError(
            "integer master is infeasible over the frozen pool "
            f"({len(pool.fsn_columns)} sub-network / {len(pool.color_columns)} color columns)"
        )
    if res.x is None:
        selected_fsns, serving, assignment, classes = _fallback_design(pool, requests)
    else:
        x = res.x
        z_sel = [i for i, var in enumerate(layout.z_vars) if x[var] > 0.5]
        x_sel = [i for i, var in enumerate(layout.x_vars) if x[var] > 0.5]

        selected_fsns = [pool.fsn_columns[i] for i in z_sel]
        serving = {}
        for idx, c in enumerate(selected_fsns):
            for k in c.served:
                serving.setdefault(k, idx)

        assignment = {}
        classes = []
        for i in x_sel:
            members = pool.color_columns[i].members
            cls = frozenset(k for k in members if k not in assignment)
            if not cls:
                continue
            for k in cls:
                assignment[k] = len(classes)
            classes.append(cls)

    wavelengths = len(classes)
    epsilon = optimality_gap(wavelengths, z_lp)
    loads = link_loads(selected_fsns, assignment, serving)
    design = DesignSolution(
        selected_fsns=selected_fsns,
        serving=serving,
        wavelength_assignment=assignment,
        wavelengths=wavelengths,
        z_lp=z_lp,
        epsilon=epsilon,
        certified=False,
        loads=loads,
        ilp_objective=res.objective if res.objective is not None else float(wavelengths),
        selected_color_members=classes,
    )
    _validate_design(design, requests, cfg)
    return design


def _fallback_design(
    pool: ColumnPool, requests: list[Request]
) -> tuple[list[FsnConfig], dict[int, int], dict[int, int], list[frozenset[int]]]:
    """Emergency incumbent when the ILP produced none before its deadline.

    Uses the seed sub-network with a first-fit coloring; always feasible
    when the seed serves every request.
    """
    if not pool.fsn_columns:
        raise DesignError("time limit reached before any incumbent was found")
    seed = pool.fsn_columns[0]
    missing = [r.id for r in requests if r.id not in seed.served]
    if missing:
        raise DesignError(
            f"time limit reached before any incumbent; seed column misses {missing}"
        )
    assignment: dict[int, int] = {}
    class_sets: list[set[int]] = []
    for k in seed.served:
        for w, cls in enumerate(class_sets):
            if all(not seed.conflict(k, kp) for kp in cls):
                cls.add(k)
                assignment[k] = w
                break
        else:
            assignment[k] = len(class_sets)
            class_sets.append({k})
    serving = {k: 0 for k in seed.served}
    return [seed], serving, assignment, [frozenset(c) for c in class_sets]
