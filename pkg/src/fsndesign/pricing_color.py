"""Wavelength-configuration pricing, heuristic and exact.

Both pricers search for a set of requests that could share one wavelength
and would lower the master LP value.  The heuristic variant forbids every
pair currently in conflict on the fractionally selected sub-networks; the
exact variant drops those rows and lets the pair duals alone discourage
conflicts (the master keeps conflicting pairs from being co-selected).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable

from .fsn_core import pair_key
from .master import ColumnPool, Duals, WavelengthConfig, color_reduced_cost
from .milp_core import GREATER, LESS, LinearModel, solve_ilp
from .topology import Request, SolverConfig

CONFLICT_EPS = 1e-9  # below this a fractional conflict weight counts as none


@dataclass
class ConflictState:
    """Per-pair aggregate conflict weight of the current RMP solution."""

    weight: dict[tuple[int, int], float]

    def conflicting(self, k: int, kp: int) -> bool:
        return self.weight.get(pair_key(k, kp), 0.0) > CONFLICT_EPS


def conflict_state(pool: ColumnPool, z_values: list[float]) -> ConflictState:
    """Weight each request pair by the selected sub-networks conflicting it."""
    weight: dict[tuple[int, int], float] = {}
    for cfg, z in zip(pool.fsn_columns, z_values):
        if z <= 0.0:
            continue
        for pair in cfg.conflicts:
            weight[pair] = weight.get(pair, 0.0) + z
    return ConflictState(weight)


@dataclass
class ColorPricingResult:
    column: WavelengthConfig | None
    reduced_cost: float | None
    proven: bool


def _build_color_model(
    requests: list[Request],
    duals: Duals,
    forbidden: list[tuple[int, int]] | None,
) -> tuple[LinearModel, dict[int, int]]:
    m = LinearModel("pp_color")
    m.objective_offset = 1.0
    ids = sorted(r.id for r in requests)
    beta = {
        k: m.add_variable(f"beta_{k}", ub=1.0, obj=-float(duals.u6[k]), integer=True)
        for k in ids
    }
    # pair products only materialize where their dual price is non-zero
    for k, kp in combinations(ids, 2):
        u5 = duals.u5.get((k, kp), 0.0)
        if u5 == 0.0:
            continue
        a = m.add_variable(f"and_{k}_{kp}", ub=1.0, obj=-u5, integer=True)
        m.add_constraint([(a, 1.0), (beta[k], -1.0)], LESS, 0.0)
        m.add_constraint([(a, 1.0), (beta[kp], -1.0)], LESS, 0.0)
        m.add_constraint([(a, -1.0), (beta[k], 1.0), (beta[kp], 1.0)], LESS, 1.0)
    if forbidden is not None:
        for k, kp in forbidden:
            m.add_constraint(
                [(beta[k], 1.0), (beta[kp], 1.0)], LESS, 1.0, f"apart_{k}_{kp}"
            )
    m.add_constraint([(b, 1.0) for b in beta.values()], GREATER, 1.0, "nonempty")
    return m, beta


def _maximalize(
    members: set[int],
    ids: list[int],
    duals: Duals,
    forbidden_with: Callable[[int, int], bool],
) -> set[int]:
    """Greedy enrichment that never worsens the reduced cost.

    A request joins when its coverage dual pays for the pair penalties it
    brings in and it clashes with no current member; at an exact pricing
    optimum only zero-cost additions remain.
    """
    for k in ids:
        if k in members:
            continue
        u6 = float(duals.u6[k])
        if u6 < 0.0:
            continue
        if any(forbidden_with(k, kp) for kp in members):
            continue
        penalty = -sum(duals.u5.get(pair_key(k, kp), 0.0) for kp in members)
        if u6 >= penalty:
            members.add(k)
    return members


def _price_color(
    requests: list[Request],
    duals: Duals,
    cfg: SolverConfig,
    forbidden: list[tuple[int, int]] | None,
    state: ConflictState | None,
    maximalize: bool,
    time_limit: float | None,
    dump_path: str | None = None,
) -> ColorPricingResult:
    model, beta = _build_color_model(requests, duals, forbidden)
    if dump_path:
        with open(dump_path, "w", encoding="utf-8") as fh:
            fh.write(model.lp_text())
    res = solve_ilp(model, time_limit=time_limit)
    if res.status != "optimal":
        return ColorPricingResult(None, res.bound, proven=False)
    assert res.x is not None and res.objective is not None
    if res.objective >= -cfg.rc_tolerance:
        return ColorPricingResult(None, res.objective, proven=True)
    members = {k for k, j in beta.items() if res.x[j] > 0.5}
    if maximalize:
        clash = state.conflicting if state is not None else (lambda k, kp: False)
        members = _maximalize(members, sorted(beta), duals, clash)
    column = WavelengthConfig(frozenset(members))
    rc = color_reduced_cost(column, duals)
    if rc > res.objective + 1e-9:
        raise AssertionError("maximalization worsened the reduced cost")
    return ColorPricingResult(column, rc, proven=True)


def price_color_heuristic(
    requests: list[Request],
    state: ConflictState,
    duals: Duals,
    cfg: SolverConfig,
    maximalize: bool = True,
    time_limit: float | None = None,
    dump_path: str | None = None,
) -> ColorPricingResult:
    """Price a wavelength column avoiding all currently conflicting pairs."""
    ids = sorted(r.id for r in requests)
    forbidden = [
        (k, kp) for k, kp in combinations(ids, 2) if state.conflicting(k, kp)
    ]
    return _price_color(
        requests, duals, cfg, forbidden, state, maximalize, time_limit, dump_path
    )


def price_color_exact(
    requests: list[Request],
    duals: Duals,
    cfg: SolverConfig,
    maximalize: bool = True,
    time_limit: float | None = None,
    dump_path: str | None = None,
) -> ColorPricingResult:
    """Price a wavelength column with conflicts priced but not forbidden."""
    return _price_color(
        requests, duals, cfg, None, None, maximalize, time_limit, dump_path
    )
