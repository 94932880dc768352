"""Exact sub-network pricing.

Builds and solves, for a given dual snapshot, the integer program that
searches for a tree-supported sub-network together with a set of
provisioned requests whose master-problem reduced cost is minimal:
selecting the tree, the directed links over it, per-request filtered
routes, the broadcast floods they induce, and the resulting pairwise
conflicts.  Acyclicity is enforced lazily through cycle cuts separated on
integer candidates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .fsn_core import FsnConfig, conflicts_from_provisioning, propagate
from .master import Duals, fsn_reduced_cost
from .milp_core import EQUAL, LESS, LinearModel, RowSpec, solve_ilp
from .topology import Edge, Link, Network, Request, SolverConfig


class PricingError(Exception):
    """Internal inconsistency between the model and the decoded column."""


@dataclass
class FsnPricingModel:
    """The pricing ILP plus the variable maps needed to decode a column."""

    model: LinearModel
    alpha: dict[Edge, int]
    node: dict[str, int]
    link: dict[Link, int]
    serve: dict[int, int]
    phi: dict[tuple[int, Link], int]
    psi: dict[tuple[int, Link], int]
    theta: dict[tuple[int, int], int]


@dataclass
class FsnPricingResult:
    column: FsnConfig | None
    reduced_cost: float | None
    proven: bool
    cuts: list[frozenset[str]] = field(default_factory=list)


def build_pp_fsn(
    net: Network,
    requests: list[Request],
    duals: Duals,
    cfg: SolverConfig,
) -> FsnPricingModel:
    """Construct the pricing model (without cycle cuts, added lazily)."""
    m = LinearModel("pp_fsn")
    m.objective_offset = -duals.u4

    alpha = {e: m.add_variable(f"alpha_{e[0]}_{e[1]}", ub=1.0, integer=True) for e in net.edges}
    node = {v: m.add_variable(f"node_{v}", ub=1.0, integer=True) for v in net.nodes}
    link = {
        l: m.add_variable(f"link_{l[0]}_{l[1]}", ub=1.0, obj=-duals.u3[l], integer=True)
        for l in net.links
    }
    serve = {
        r.id: m.add_variable(f"serve_{r.id}", ub=1.0, obj=-float(duals.u2[r.id]), integer=True)
        for r in requests
    }
    phi = {}
    psi = {}
    for r in requests:
        for l in net.links:
            phi[(r.id, l)] = m.add_variable(f"phi_{r.id}_{l[0]}_{l[1]}", ub=1.0, integer=True)
            psi[(r.id, l)] = m.add_variable(f"psi_{r.id}_{l[0]}_{l[1]}", ub=1.0, integer=True)
    ids = sorted(r.id for r in requests)
    theta = {
        (k, kp): m.add_variable(
            f"theta_{k}_{kp}", ub=1.0, obj=-duals.u5[(k, kp)], integer=True
        )
        for k, kp in combinations(ids, 2)
    }
    omega = {}
    for k in ids:
        for kp in ids:
            if k == kp:
                continue
            for l in net.links:
                omega[(k, kp, l)] = m.add_variable(
                    f"omega_{k}_{kp}_{l[0]}_{l[1]}", ub=1.0, integer=True
                )

    # a single tree: one more selected node than selected edges
    m.add_constraint(
        [(node[v], 1.0) for v in net.nodes] + [(alpha[e], -1.0) for e in net.edges],
        EQUAL,
        1.0,
        "single_tree",
    )
    # an edge needs both endpoints; a selected node needs an incident edge
    for e in net.edges:
        u, v = e
        m.add_constraint(
            [(alpha[e], 2.0), (node[u], -1.0), (node[v], -1.0)], LESS, 0.0, f"ends_{u}_{v}"
        )
    for v in net.nodes:
        m.add_constraint(
            [(node[v], 1.0)] + [(alpha[e], -1.0) for e in net.cocycle(v)],
            LESS,
            0.0,
            f"incident_{v}",
        )
    # a directed link may be used only over a tree edge, and a selected
    # link must carry at least one channel
    for l in net.links:
        m.add_constraint(
            [(link[l], 1.0), (alpha[net.edge_of(l)], -1.0)], LESS, 0.0,
            f"support_{l[0]}_{l[1]}",
        )
        m.add_constraint(
            [(link[l], 1.0)] + [(phi[(r.id, l)], -1.0) for r in requests],
            LESS, 0.0, f"used_{l[0]}_{l[1]}",
        )

    by_id = {r.id: r for r in requests}
    for r in requests:
        k = r.id
        # channels live on sub-network links only; every link carries some channel
        for l in net.links:
            m.add_constraint(
                [(phi[(k, l)], 1.0), (link[l], -1.0)], LESS, 0.0, f"on_subnet_{k}_{l[0]}_{l[1]}"
            )
        # a channel never occupies both directions of a fiber pair
        for e in net.edges:
            fwd, bwd = (e[0], e[1]), (e[1], e[0])
            m.add_constraint(
                [(phi[(k, fwd)], 1.0), (phi[(k, bwd)], 1.0)], LESS, 1.0,
                f"oneway_{k}_{e[0]}_{e[1]}",
            )
        # the channel leaves the source once and reaches the destination once
        m.add_constraint(
            [(phi[(k, l)], 1.0) for l in net.in_links(r.destination)] + [(serve[k], -1.0)],
            EQUAL, 0.0, f"flood_dst_{k}",
        )
        m.add_constraint(
            [(phi[(k, l)], 1.0) for l in net.out_links(r.source)] + [(serve[k], -1.0)],
            EQUAL, 0.0, f"flood_src_{k}",
        )
        m.add_constraint(
            [(phi[(k, l)], 1.0) for l in net.in_links(r.source)], EQUAL, 0.0,
            f"flood_not_into_src_{k}",
        )
        # no spontaneous flood: an out-link carries the channel only when some in-link does
        for v in net.nodes:
            if v == r.source:
                continue
            in_v = net.in_links(v)
            for lp in net.out_links(v):
                m.add_constraint(
                    [(phi[(k, lp)], 1.0), (link[lp], 1.0)]
                    + [(phi[(k, l)], -1.0) for l in in_v],
                    LESS, 1.0, f"flood_in_{k}_{lp[0]}_{lp[1]}",
                )
        # broadcast: an arriving channel is copied onto every other onward link
        for v in net.nodes:
            for l in net.in_links(v):
                rev = (l[1], l[0])
                for lp in net.out_links(v):
                    if lp == rev:
                        continue
                    m.add_constraint(
                        [(phi[(k, l)], 1.0), (phi[(k, lp)], -1.0), (link[l], 1.0), (link[lp], 1.0)],
                        LESS, 2.0, f"flood_out_{k}_{l[0]}_{l[1]}_{lp[1]}",
                    )
        # filtered route: unit path flow from source to destination
        m.add_constraint(
            [(psi[(k, l)], 1.0) for l in net.in_links(r.destination)] + [(serve[k], -1.0)],
            EQUAL, 0.0, f"route_dst_{k}",
        )
        m.add_constraint(
            [(psi[(k, l)], 1.0) for l in net.out_links(r.source)] + [(serve[k], -1.0)],
            EQUAL, 0.0, f"route_src_{k}",
        )
        for v in net.nodes:
            if v in (r.source, r.destination):
                continue
            m.add_constraint(
                [(psi[(k, l)], 1.0) for l in net.in_links(v)]
                + [(psi[(k, l)], -1.0) for l in net.out_links(v)],
                EQUAL, 0.0, f"route_balance_{k}_{v}",
            )
            m.add_constraint(
                [(psi[(k, l)], 1.0) for l in net.in_links(v)] + [(serve[k], -1.0)],
                LESS, 0.0, f"route_once_{k}_{v}",
            )
        m.add_constraint(
            [(psi[(k, l)], 1.0) for l in net.out_links(r.destination)], EQUAL, 0.0,
            f"route_stops_{k}",
        )
        m.add_constraint(
            [(psi[(k, l)], 1.0) for l in net.in_links(r.source)], EQUAL, 0.0,
            f"route_not_into_src_{k}",
        )
        # optical reach bounds the filtered route length
        m.add_constraint(
            [(psi[(k, l)], net.length_of(l)) for l in net.links], LESS, cfg.reach_km,
            f"reach_{k}",
        )
        # the filtered route is part of the flood
        for l in net.links:
            m.add_constraint(
                [(psi[(k, l)], 1.0), (phi[(k, l)], -1.0)], LESS, 0.0,
                f"route_in_flood_{k}_{l[0]}_{l[1]}",
            )

    # conflicts: routes meeting routes or floods force theta, and theta is
    # pinned to zero when no such meeting link exists
    for k, kp in combinations(ids, 2):
        t = theta[(k, kp)]
        for l in net.links:
            m.add_constraint(
                [(psi[(k, l)], 1.0), (psi[(kp, l)], 1.0), (t, -1.0)], LESS, 1.0,
                f"clash_rr_{k}_{kp}_{l[0]}_{l[1]}",
            )
            m.add_constraint(
                [(psi[(k, l)], 1.0), (phi[(kp, l)], 1.0), (t, -1.0)], LESS, 1.0,
                f"clash_rf_{k}_{kp}_{l[0]}_{l[1]}",
            )
            m.add_constraint(
                [(psi[(kp, l)], 1.0), (phi[(k, l)], 1.0), (t, -1.0)], LESS, 1.0,
                f"clash_fr_{k}_{kp}_{l[0]}_{l[1]}",
            )
        m.add_constraint(
            [(t, 1.0)]
            + [(omega[(k, kp, l)], -1.0) for l in net.links]
            + [(omega[(kp, k, l)], -1.0) for l in net.links],
            LESS, 0.0, f"no_clash_{k}_{kp}",
        )
    for (k, kp, l), w in omega.items():
        m.add_constraint([(w, 1.0), (psi[(k, l)], -1.0)], LESS, 0.0)
        m.add_constraint([(w, 1.0), (phi[(kp, l)], -1.0)], LESS, 0.0)
        m.add_constraint(
            [(w, -1.0), (psi[(k, l)], 1.0), (phi[(kp, l)], 1.0)], LESS, 1.0
        )

    return FsnPricingModel(m, alpha, node, link, serve, phi, psi, theta)


def separate_subtours(net: Network, selected_edges: set[Edge]) -> list[frozenset[str]]:
    """Node sets of cyclic components among the selected edges.

    Each returned node set V' yields the cut: the number of selected edges
    inside V' may not exceed |V'| - 1.  Empty iff the selection is a forest.
    """
    adj: dict[str, list[str]] = {}
    for u, v in selected_edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    seen: set[str] = set()
    cuts = []
    for start in adj:
        if start in seen:
            continue
        comp = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w not in comp:
                    comp.add(w)
                    stack.append(w)
        seen |= comp
        inside = sum(1 for u, v in selected_edges if u in comp and v in comp)
        if inside > len(comp) - 1:
            cuts.append(frozenset(comp))
    return cuts


def _cut_row(pm: FsnPricingModel, net: Network, nodes: frozenset[str]) -> RowSpec:
    coeffs = [
        (pm.alpha[e], 1.0) for e in net.edges if e[0] in nodes and e[1] in nodes
    ]
    return (coeffs, LESS, float(len(nodes) - 1))


def _decode_route(psi_links: set[Link], request: Request) -> tuple[Link, ...]:
    by_tail = {l[0]: l for l in psi_links}
    if len(by_tail) != len(psi_links):
        raise PricingError(f"request {request.id}: branched filtered route")
    route = []
    at = request.source
    while at != request.destination:
        hop = by_tail.get(at)
        if hop is None or len(route) > len(psi_links):
            raise PricingError(f"request {request.id}: broken filtered route")
        route.append(hop)
        at = hop[1]
    if len(route) != len(psi_links):
        raise PricingError(f"request {request.id}: disconnected route links")
    return tuple(route)


def decode_column(
    pm: FsnPricingModel, x: np.ndarray, net: Network, requests: list[Request]
) -> FsnConfig:
    """Read a column off an integer solution of the pricing model."""
    pick = lambda j: x[j] > 0.5
    tree = frozenset(e for e, j in pm.alpha.items() if pick(j))
    nodes = frozenset(v for v, j in pm.node.items() if pick(j))
    links = frozenset(l for l, j in pm.link.items() if pick(j))
    served = sorted(k for k, j in pm.serve.items() if pick(j))
    by_id = {r.id: r for r in requests}
    routes: dict[int, tuple[Link, ...]] = {}
    floods: dict[int, frozenset[Link]] = {}
    for k in served:
        psi_links = {l for l in net.links if pick(pm.psi[(k, l)])}
        routes[k] = _decode_route(psi_links, by_id[k])
        floods[k] = frozenset(l for l in net.links if pick(pm.phi[(k, l)]))
    conflicts = frozenset(
        p for p, j in pm.theta.items() if pick(j) and p[0] in routes and p[1] in routes
    )
    return FsnConfig(
        tree_edges=tree,
        nodes=nodes,
        links=links,
        served=tuple(served),
        routes=routes,
        propagation=floods,
        conflicts=conflicts,
    )


def _check_column(cfg: FsnConfig, duals: Duals, objective: float) -> None:
    for k, route in cfg.routes.items():
        if cfg.propagation[k] != propagate(cfg.links, route):
            raise PricingError(f"request {k}: model flood differs from the flood closure")
    if cfg.conflicts != conflicts_from_provisioning(cfg.routes, cfg.propagation):
        raise PricingError("model conflict matrix differs from recomputation")
    rc = fsn_reduced_cost(cfg, duals)
    if abs(rc - objective) > 1e-6:
        raise PricingError(f"reduced cost mismatch: model {objective} vs column {rc}")


def price_fsn(
    net: Network,
    requests: list[Request],
    duals: Duals,
    cfg: SolverConfig,
    initial_cuts: list[frozenset[str]] | None = None,
    time_limit: float | None = None,
    dump_path: str | None = None,
) -> FsnPricingResult:
    """Emit an improving sub-network column, or certify that none exists.

    ``initial_cuts`` may carry cycle cuts (node sets) discovered earlier;
    they are valid for every dual snapshot.  On a solver limit the result
    is absent and flagged not proven.
    """
    pm = build_pp_fsn(net, requests, duals, cfg)
    cuts: list[frozenset[str]] = list(initial_cuts or [])
    for nodes in cuts:
        coeffs, sense, rhs = _cut_row(pm, net, nodes)
        pm.model.add_constraint(coeffs, sense, rhs, name="cycle_cut")
    if dump_path:
        with open(dump_path, "w", encoding="utf-8") as fh:
            fh.write(pm.model.lp_text())

    def separator(x: np.ndarray) -> list[RowSpec]:
        selected = {e for e, j in pm.alpha.items() if x[j] > 0.5}
        new = separate_subtours(net, selected)
        cuts.extend(new)
        return [_cut_row(pm, net, nodes) for nodes in new]

    res = solve_ilp(pm.model, separator=separator, time_limit=time_limit)
    if res.status != "optimal":
        return FsnPricingResult(None, res.bound, proven=False, cuts=cuts)
    assert res.x is not None and res.objective is not None
    if res.objective >= -cfg.rc_tolerance:
        return FsnPricingResult(None, res.objective, proven=True, cuts=cuts)
    column = decode_column(pm, res.x, net, requests)
    _check_column(column, duals, res.objective)
    return FsnPricingResult(column, res.objective, proven=True, cuts=cuts)
