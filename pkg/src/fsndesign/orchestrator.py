"""End-to-end solution scheme.

Seeds the column pool with a single spanning-tree sub-network and a greedy
wavelength coloring, then alternates: solve the restricted master LP,
try sub-network pricing, then heuristic wavelength pricing, then exact
wavelength pricing; any improving column returns control to the master.
When no pricer can improve, the LP bound is optimal and the integer master
over the frozen pool yields the reported design and its gap.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from typing import Iterable

from . import master as master_mod
from .fsn_core import FsnConfig, build_fsn_config, route_in_tree, tree_path
from .master import (
    ColumnPool,
    DesignError,
    DesignSolution,
    Duals,
    WavelengthConfig,
    build_rmp,
    color_reduced_cost,
    extract_duals,
    finalize,
    fsn_reduced_cost,
)
from .milp_core import solve_lp
from .pricing_color import conflict_state, price_color_exact, price_color_heuristic
from .pricing_fsn import price_fsn
from .topology import Edge, Network, Request, SolverConfig

log = logging.getLogger(__name__)


@dataclass
class IterationRecord:
    iteration: int
    lp_value: float
    pricer: str | None  # fsn | color_heuristic | color_exact | None at convergence
    reduced_cost: float | None
    column_index: int | None
    wall_time_s: float
    duals: Duals | None = None
    column: object | None = None

    def summary(self) -> dict:
        return {
            "iteration": self.iteration,
            "lp_value": self.lp_value,
            "pricer": self.pricer,
            "reduced_cost": self.reduced_cost,
            "column_index": self.column_index,
            "wall_time_s": round(self.wall_time_s, 6),
        }


@dataclass
class CgLog:
    records: list[IterationRecord] = field(default_factory=list)
    termination: str = "optimal"  # optimal | iteration_limit | time_limit
    certified: bool = False
    z_lp: float = 0.0
    wall_time_s: float = 0.0
    final_duals: Duals | None = None
    fsn_columns: list[FsnConfig] = field(default_factory=list)
    color_columns: list[WavelengthConfig] = field(default_factory=list)

    def lp_values(self) -> list[float]:
        return [r.lp_value for r in self.records]

    def to_json(self) -> str:
        return json.dumps(
            {
                "termination": self.termination,
                "certified": self.certified,
                "z_lp": self.z_lp,
                "wall_time_s": round(self.wall_time_s, 6),
                "iterations": [r.summary() for r in self.records],
            },
            indent=2,
        )


def welsh_powell(vertices: Iterable[int], edges: Iterable[tuple[int, int]]) -> dict[int, int]:
    """Greedy coloring: vertices by non-increasing degree (ties by id),
    each receiving the smallest color unused among its colored neighbours."""
    verts = sorted(set(vertices))
    adj: dict[int, set[int]] = {v: set() for v in verts}
    for u, v in edges:
        if u == v:
            continue
        adj[u].add(v)
        adj[v].add(u)
    order = sorted(verts, key=lambda v: (-len(adj[v]), v))
    color: dict[int, int] = {}
    for v in order:
        taken = {color[w] for w in adj[v] if w in color}
        c = 0
        while c in taken:
            c += 1
        color[v] = c
    return color


def minimum_spanning_tree(net: Network) -> frozenset[Edge]:
    """Shortest-total-length spanning tree; ties broken by declaration order."""
    order = {e: i for i, e in enumerate(net.edges)}
    parent = {v: v for v in net.nodes}

    def find(v: str) -> str:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    chosen: set[Edge] = set()
    for e in sorted(net.edges, key=lambda e: (net.length_of(e), order[e])):
        ru, rv = find(e[0]), find(e[1])
        if ru != rv:
            parent[ru] = rv
            chosen.add(e)
    if len(chosen) != len(net.nodes) - 1:
        raise DesignError("network is disconnected; no spanning sub-network exists")
    return frozenset(chosen)


def initial_solution(
    net: Network, requests: list[Request], cfg: SolverConfig
) -> tuple[FsnConfig, list[WavelengthConfig], list[int]]:
    """Seed columns: one spanning-tree sub-network carrying every request
    it can reach, and the color classes of a greedy conflict coloring.

    Returns the sub-network column, the wavelength columns, and the ids of
    requests excluded because their tree route exceeds the reach bound.
    """
    tree = minimum_spanning_tree(net)
    links = frozenset(l for e in tree for l in ((e[0], e[1]), (e[1], e[0])))
    servable: list[int] = []
    skipped: list[int] = []
    for r in requests:
        route = route_in_tree(links, tree, r)
        if route is None:
            skipped.append(r.id)
            continue
        length = sum(net.length_of(hop) for hop in route)
        if length > cfg.reach_km + 1e-9:
            log.warning(
                "request %d (%s->%s) exceeds reach on the seed tree (%.1f km)",
                r.id, r.source, r.destination, length,
            )
            skipped.append(r.id)
        else:
            servable.append(r.id)
    if not servable:
        raise DesignError("no request is servable on the seed spanning tree")
    # keep only fiber directions that actually carry a channel
    fsn = build_fsn_config(net, requests, servable, tree, links, trim=True)
    coloring = welsh_powell(fsn.served, fsn.conflicts)
    classes: dict[int, set[int]] = {}
    for k, c in coloring.items():
        classes.setdefault(c, set()).add(k)
    colors = [WavelengthConfig(frozenset(classes[c])) for c in sorted(classes)]
    return fsn, colors, skipped


@dataclass
class _PricingRound:
    name: str
    column: object | None
    reduced_cost: float | None
    proven: bool


def run(
    net: Network,
    requests: list[Request],
    cfg: SolverConfig,
    dump_dir: str | None = None,
) -> tuple[DesignSolution, CgLog]:
    """Full pipeline: seed, column generation, integer finalization."""
    t0 = time.monotonic()
    deadline = t0 + cfg.time_limit_s
    cg = CgLog()

    if not net.is_connected():
        raise DesignError("network is disconnected")
    fsn0, colors0, skipped = initial_solution(net, requests, cfg)
    pool = ColumnPool(net, requests, cfg.reach_km)
    pool.add_fsn(fsn0)
    for col in colors0:
        pool.add_color(col)
    if skipped:
        log.warning("seed column excludes requests %s", skipped)

    cycle_cuts: list[frozenset[str]] = []
    z_lp = float("inf")
    certified = False
    termination = "iteration_limit"

    for iteration in range(1, cfg.max_cg_iterations + 1):
        model, layout = build_rmp(pool, net, requests, cfg, integer=False)
        if dump_dir:
            _dump(dump_dir, f"rmp_{iteration:03d}.lp", model.lp_text())
        lp = solve_lp(model)
        if lp.status != "optimal":
            raise DesignError(f"restricted master LP is {lp.status}")
        assert lp.objective is not None and lp.x is not None
        z_lp = lp.objective
        duals = extract_duals(lp, layout)
        elapsed = time.monotonic() - t0
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            cg.records.append(
                IterationRecord(iteration, z_lp, None, None, None, elapsed, duals)
            )
            termination = "time_limit"
            break

        round_result = _pricing_round(
            net, requests, cfg, pool, lp, layout, duals, cycle_cuts, remaining,
            dump_dir, iteration,
        )
        cg.records.append(
            IterationRecord(
                iteration,
                z_lp,
                round_result.name if round_result.column is not None else None,
                round_result.reduced_cost if round_result.column is not None else None,
                _pool_index(pool, round_result) if round_result.column is not None else None,
                time.monotonic() - t0,
                duals,
                round_result.column,
            )
        )
        if round_result.column is None:
            certified = round_result.proven
            termination = "optimal" if round_result.proven else "time_limit"
            break
        log.info(
            "iter %d: lp %.6f, %s column rc %.6f",
            iteration, z_lp, round_result.name, round_result.reduced_cost,
        )
    else:
        termination = "iteration_limit"

    cg.termination = termination
    cg.certified = certified
    cg.z_lp = z_lp
    cg.final_duals = cg.records[-1].duals if cg.records else None
    cg.fsn_columns = list(pool.fsn_columns)
    cg.color_columns = list(pool.color_columns)

    remaining = max(deadline - time.monotonic(), 10.0)
    design = finalize(pool, net, requests, cfg, z_lp, time_limit_s=remaining)
    design.certified = certified
    cg.wall_time_s = time.monotonic() - t0
    return design, cg


def _pricing_round(
    net: Network,
    requests: list[Request],
    cfg: SolverConfig,
    pool: ColumnPool,
    lp,
    layout,
    duals: Duals,
    cycle_cuts: list[frozenset[str]],
    remaining: float,
    dump_dir: str | None,
    iteration: int,
) -> _PricingRound:
    """One pass of the pricing alternance; adds at most one column."""
    dump = (
        (lambda name: _dump_path(dump_dir, f"{name}_{iteration:03d}.lp"))
        if dump_dir
        else (lambda name: None)
    )
    fsn_res = price_fsn(
        net, requests, duals, cfg, initial_cuts=cycle_cuts, time_limit=remaining,
        dump_path=dump("pp_fsn"),
    )
    cycle_cuts[:] = fsn_res.cuts
    if fsn_res.column is not None:
        if pool.add_fsn(fsn_res.column):
            return _PricingRound("fsn", fsn_res.column, fsn_res.reduced_cost, True)
        log.warning("sub-network pricer repeated a pooled column; ignoring it")

    z_values = [float(lp.x[j]) for j in layout.z_vars]
    state = conflict_state(pool, z_values)
    heur = price_color_heuristic(
        requests, state, duals, cfg, time_limit=remaining, dump_path=dump("pp_color_h")
    )
    if heur.column is not None:
        if pool.add_color(heur.column):
            return _PricingRound("color_heuristic", heur.column, heur.reduced_cost, True)
        log.warning("heuristic color pricer repeated a pooled column; ignoring it")

    exact = price_color_exact(
        requests, duals, cfg, time_limit=remaining, dump_path=dump("pp_color_e")
    )
    if exact.column is not None:
        if pool.add_color(exact.column):
            return _PricingRound("color_exact", exact.column, exact.reduced_cost, True)
        log.warning("exact color pricer repeated a pooled column; ignoring it")

    proven = fsn_res.proven and heur.proven and exact.proven
    return _PricingRound("none", None, None, proven)


def _pool_index(pool: ColumnPool, round_result: _PricingRound) -> int:
    if round_result.name == "fsn":
        return len(pool.fsn_columns) - 1
    return len(pool.color_columns) - 1


def _dump_path(dump_dir: str, name: str) -> str:
    import os

    os.makedirs(dump_dir, exist_ok=True)
    return os.path.join(dump_dir, name)


def _dump(dump_dir: str, name: str, text: str) -> None:
    with open(_dump_path(dump_dir, name), "w", encoding="utf-8") as fh:
        fh.write(text)
