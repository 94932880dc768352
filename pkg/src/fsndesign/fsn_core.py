"""Executable semantics of a filterless sub-network (FSN).

An FSN is a directed link set supported by an undirected tree.  A request
provisioned on it follows the unique tree path from source to destination
(its *filtered route*); because nodes are passive splitters, the channel
additionally floods onto every downstream sub-network link (its
*propagation*).  Two requests conflict when one's filtered route meets the
other's route or flood on some link; conflicting requests cannot share a
wavelength.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .topology import Edge, Link, Network, Request

ConflictPairs = frozenset[tuple[int, int]]


def pair_key(k: int, kp: int) -> tuple[int, int]:
    """Canonical unordered request pair."""
    return (k, kp) if k < kp else (kp, k)


@dataclass(frozen=True)
class FsnConfig:
    """One sub-network column: tree, directed links, and provisioning.

    ``routes`` maps each served request id to its ordered filtered link
    sequence, ``propagation`` to the full set of links its channel
    occupies.  ``conflicts`` is the set of unordered served pairs that
    cannot share a wavelength.
    """

    tree_edges: frozenset[Edge]
    nodes: frozenset[str]
    links: frozenset[Link]
    served: tuple[int, ...]
    routes: dict[int, tuple[Link, ...]]
    propagation: dict[int, frozenset[Link]]
    conflicts: ConflictPairs

    def conflict(self, k: int, kp: int) -> bool:
        return pair_key(k, kp) in self.conflicts

    def signature(self) -> tuple:
        """Identity of the master-problem column: links, serving, conflicts."""
        return (self.links, self.served, self.conflicts)


@dataclass
class LoadReport:
    """Per-link wavelength counts, split into filtered and total (with flood)."""

    filtered: dict[Link, int]
    total: dict[Link, int]
    max_filtered: int
    max_total: int


def _tree_adjacency(tree: frozenset[Edge]) -> dict[str, list[str]]:
    adj: dict[str, list[str]] = {}
    for u, v in tree:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    return adj


def tree_path(tree: frozenset[Edge], source: str, destination: str) -> list[str] | None:
    """Node sequence of the unique tree path, or None if not connected in it."""
    adj = _tree_adjacency(tree)
    if source not in adj or destination not in adj:
        return None
    parent: dict[str, str | None] = {source: None}
    stack = [source]
    while stack:
        v = stack.pop()
        if v == destination:
            break
        for w in adj[v]:
            if w not in parent:
                parent[w] = v
                stack.append(w)
    if destination not in parent:
        return None
    path = [destination]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])  # type: ignore[arg-type]
    path.reverse()
    return path


def route_in_tree(
    fsn_links: frozenset[Link], tree: frozenset[Edge], request: Request
) -> tuple[Link, ...] | None:
    """Oriented tree path of ``request``, or None when not servable.

    The path is unique on a tree; it is returned only when every oriented
    hop is actually a sub-network link (a tree edge may carry one fiber
    direction only).
    """
    nodes = tree_path(tree, request.source, request.destination)
    if nodes is None:
        return None
    hops = tuple(zip(nodes, nodes[1:]))
    for hop in hops:
        if hop not in fsn_links:
            return None
    return hops


def propagate(fsn_links: frozenset[Link], route: tuple[Link, ...]) -> frozenset[Link]:
    """Downstream flood closure of a filtered route.

    Starting from the route's first link, the channel is copied onto every
    sub-network out-link of each reached node, never onto a link whose
    reverse already carries it.  The result is the unique minimal closed
    superset of the route.
    """
    if not route:
        raise ValueError("route must be non-empty")
    for hop in route:
        if hop not in fsn_links:
            raise ValueError(f"route link {hop} not in the sub-network")
    out: dict[str, list[Link]] = {}
    for link in fsn_links:
        out.setdefault(link[0], []).append(link)
    flood: set[Link] = {route[0]}
    frontier = [route[0]]
    while frontier:
        _, head = frontier.pop()
        for nxt in out.get(head, ()):  # copy onto all onward fibers
            if nxt not in flood and (nxt[1], nxt[0]) not in flood:
                flood.add(nxt)
                frontier.append(nxt)
    return frozenset(flood)


def conflicts_from_provisioning(
    routes: dict[int, tuple[Link, ...]],
    propagation: dict[int, frozenset[Link]],
) -> ConflictPairs:
    """Unordered pairs whose route/flood footprints collide on some link."""
    route_sets = {k: frozenset(r) for k, r in routes.items()}
    pairs = set()
    for k, kp in combinations(sorted(routes), 2):
        if (
            route_sets[k] & route_sets[kp]
            or route_sets[k] & propagation[kp]
            or route_sets[kp] & propagation[k]
        ):
            pairs.add((k, kp))
    return frozenset(pairs)


def detect_conflicts(cfg: FsnConfig) -> ConflictPairs:
    """Recompute the conflict pairs of a config from its routes and floods."""
    for k in cfg.served:
        if k not in cfg.routes or k not in cfg.propagation:
            raise KeyError(f"request {k} served but has no route/propagation")
    return conflicts_from_provisioning(cfg.routes, cfg.propagation)


def build_fsn_config(
    net: Network,
    requests: list[Request],
    served_ids: list[int],
    tree_edges: frozenset[Edge],
    links: frozenset[Link] | None = None,
    trim: bool = False,
) -> FsnConfig:
    """Assemble a config by routing ``served_ids`` on the given tree.

    When ``links`` is None, both orientations of every tree edge are taken.
    With ``trim`` the link set is reduced to the fibers some channel
    actually occupies; floods are self-contained, so they do not change.
    Raises ValueError if some request cannot be routed.
    """
    by_id = {r.id: r for r in requests}
    if links is None:
        links = frozenset(
            link for e in tree_edges for link in ((e[0], e[1]), (e[1], e[0]))
        )
    routes: dict[int, tuple[Link, ...]] = {}
    propagation: dict[int, frozenset[Link]] = {}
    for k in served_ids:
        route = route_in_tree(links, tree_edges, by_id[k])
        if route is None:
            raise ValueError(f"request {k} is not servable on this sub-network")
        routes[k] = route
        propagation[k] = propagate(links, route)
    if trim:
        links = frozenset(l for flood in propagation.values() for l in flood)
    nodes = frozenset(v for e in tree_edges for v in e)
    return FsnConfig(
        tree_edges=frozenset(tree_edges),
        nodes=nodes,
        links=frozenset(links),
        served=tuple(sorted(served_ids)),
        routes=routes,
        propagation=propagation,
        conflicts=conflicts_from_provisioning(routes, propagation),
    )


def _tree_is_connected(tree: frozenset[Edge], nodes: frozenset[str]) -> bool:
    if not nodes:
        return False
    adj = _tree_adjacency(tree)
    start = next(iter(nodes))
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in adj.get(v, ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen == nodes


def verify_fsn_config(
    cfg: FsnConfig, net: Network, requests: list[Request], reach_km: float
) -> list[str]:
    """All structural violations of ``cfg``; empty list means valid.

    Checks tree shape, link/edge consistency, link usage, route and flood
    correctness, the reach bound, and the conflict matrix.
    """
    bad: list[str] = []
    by_id = {r.id: r for r in requests}

    tree_nodes = frozenset(v for e in cfg.tree_edges for v in e)
    if not cfg.tree_edges:
        bad.append("tree: empty edge set (a sub-network needs at least one edge)")
    else:
        if cfg.nodes != tree_nodes:
            bad.append("tree: node set does not match tree edge endpoints")
        if len(cfg.tree_edges) != len(tree_nodes) - 1:
            bad.append(
                f"subtour: {len(cfg.tree_edges)} edges over {len(tree_nodes)} nodes"
            )
        elif not _tree_is_connected(cfg.tree_edges, tree_nodes):
            # right cardinality but disconnected means some component has a cycle
            bad.append("subtour: selected edges are not a single connected tree")
    for e in cfg.tree_edges:
        if e not in net.edges and (e[1], e[0]) not in net.edges:
            bad.append(f"tree: edge {e} not in the network")

    for link in cfg.links:
        if net.edge_key(*link) not in cfg.tree_edges:
            bad.append(f"link {link}: its edge is not on the tree")

    covered: set[Link] = set()
    for k in cfg.served:
        if k not in by_id:
            bad.append(f"request {k}: unknown id")
            continue
        req = by_id[k]
        route = cfg.routes.get(k)
        flood = cfg.propagation.get(k)
        if route is None or flood is None:
            bad.append(f"request {k}: missing route or propagation")
            continue
        if not route:
            bad.append(f"request {k}: empty route")
            continue
        if route[0][0] != req.source or route[-1][1] != req.destination:
            bad.append(f"request {k}: route does not join {req.source}->{req.destination}")
        for a, b in zip(route, route[1:]):
            if a[1] != b[0]:
                bad.append(f"request {k}: route is not contiguous at {a}->{b}")
        if len({net.edge_key(*hop) for hop in route}) != len(route):
            bad.append(f"request {k}: route repeats an edge")
        for hop in route:
            if hop not in cfg.links:
                bad.append(f"request {k}: route link {hop} not in the sub-network")
        if not set(route) <= flood:
            bad.append(f"request {k}: route not contained in its propagation")
        for link in flood:
            if link not in cfg.links:
                bad.append(f"request {k}: propagated link {link} not in the sub-network")
            if (link[1], link[0]) in flood:
                bad.append(f"request {k}: propagation uses both directions of {link}")
        length = sum(net.length_of(hop) for hop in route if hop in net.links)
        if length > reach_km + 1e-9:
            bad.append(f"reach exceeded: k={k} route length {length} > {reach_km}")
        if all(hop in cfg.links for hop in route):
            expected = propagate(cfg.links, route)
            if flood != expected:
                bad.append(f"request {k}: propagation is not the flood closure")
        covered |= flood

    for link in cfg.links:
        if link not in covered:
            bad.append(f"link {link}: carries no request's propagation")

    for k, kp in cfg.conflicts:
        if k == kp:
            bad.append(f"conflict ({k},{k}): self pair")
        if k not in cfg.routes or kp not in cfg.routes:
            bad.append(f"conflict ({k},{kp}): member not served")
    if not bad:
        expected_conflicts = conflicts_from_provisioning(cfg.routes, cfg.propagation)
        if cfg.conflicts != expected_conflicts:
            bad.append("conflicts: matrix does not match routes and floods")
    return bad


def link_loads(
    selected: list[FsnConfig],
    coloring: dict[int, int],
    serving: dict[int, int] | None = None,
) -> LoadReport:
    """Distinct-wavelength counts per link over the selected sub-networks.

    ``serving`` optionally restricts each request to one config index;
    without it every config counts all of its served requests.  Selected
    configs must be pairwise directed-link disjoint.
    """
    seen: set[Link] = set()
    for cfg in selected:
        overlap = seen & cfg.links
        if overlap:
            raise ValueError(f"sub-networks overlap on links {sorted(overlap)}")
        seen |= cfg.links
    filtered_w: dict[Link, set[int]] = {}
    total_w: dict[Link, set[int]] = {}
    for idx, cfg in enumerate(selected):
        for k in cfg.served:
            if serving is not None and serving.get(k) != idx:
                continue
            w = coloring[k]
            for hop in cfg.routes[k]:
                filtered_w.setdefault(hop, set()).add(w)
            for link in cfg.propagation[k]:
                total_w.setdefault(link, set()).add(w)
    filtered = {l: len(ws) for l, ws in filtered_w.items()}
    total = {l: len(ws) for l, ws in total_w.items()}
    return LoadReport(
        filtered=filtered,
        total=total,
        max_filtered=max(filtered.values(), default=0),
        max_total=max(total.values(), default=0),
    )
