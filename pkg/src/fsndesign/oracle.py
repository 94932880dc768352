"""Independent brute-force optimum for tiny instances.

Everything here is recomputed from first principles (own flood, own
conflict scan, exhaustive tree and assignment enumeration) so that the
result certifies the column-generation pipeline rather than echoing it.
Never intended for real topologies.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .topology import Edge, Link, Network, Request, SolverConfig


class OracleLimitError(ValueError):
    """Instance exceeds the sizes exhaustive search can handle."""


class OracleInfeasibleError(ValueError):
    """No feasible design exists within the given sub-network budget."""


def oracle_min_coloring(vertices: list[int], edges: set[tuple[int, int]]) -> int:
    """Exact chromatic number by backtracking with a color-count bound."""
    verts = sorted(set(vertices))
    if len(verts) > 16:
        raise OracleLimitError(f"{len(verts)} vertices exceed the oracle limit of 16")
    if not verts:
        return 0
    adj: dict[int, set[int]] = {v: set() for v in verts}
    for u, v in edges:
        if u == v:
            continue
        adj[u].add(v)
        adj[v].add(u)
    order = sorted(verts, key=lambda v: -len(adj[v]))
    best = len(verts)
    colors: dict[int, int] = {}

    def extend(i: int, used: int) -> None:
        nonlocal best
        if used >= best:
            return
        if i == len(order):
            best = used
            return
        v = order[i]
        taken = {colors[w] for w in adj[v] if w in colors}
        for c in range(min(used + 1, best)):
            if c in taken:
                continue
            colors[v] = c
            extend(i + 1, max(used, c + 1))
            del colors[v]

    extend(0, 0)
    return best


def _enumerate_subtrees(net: Network) -> list[frozenset[Edge]]:
    """All acyclic, connected, non-empty edge subsets of the network."""
    edges = list(net.edges)
    out: list[frozenset[Edge]] = []
    for mask in range(1, 1 << len(edges)):
        subset = [edges[i] for i in range(len(edges)) if mask >> i & 1]
        nodes = {v for e in subset for v in e}
        if len(subset) != len(nodes) - 1:
            continue
        # connectivity check by union-find over the subset
        parent = {v: v for v in nodes}

        def find(v: str) -> str:
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        acyclic = True
        for u, v in subset:
            ru, rv = find(u), find(v)
            if ru == rv:
                acyclic = False
                break
            parent[ru] = rv
        if acyclic:
            out.append(frozenset(subset))
    return out


def _paths_on_tree(
    tree: frozenset[Edge], requests: list[Request], net: Network, reach_km: float
) -> dict[int, tuple[Link, ...]] | None:
    """Oriented tree path per request, or None when some request misses.

    Recomputed locally: breadth-first walk on the tree adjacency.
    """
    adj: dict[str, list[str]] = {}
    for u, v in tree:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    paths: dict[int, tuple[Link, ...]] = {}
    for r in requests:
        if r.source not in adj or r.destination not in adj:
            return None
        prev: dict[str, str | None] = {r.source: None}
        queue = [r.source]
        while queue:
            v = queue.pop(0)
            for w in adj[v]:
                if w not in prev:
                    prev[w] = v
                    queue.append(w)
        if r.destination not in prev:
            return None
        hops: list[Link] = []
        at = r.destination
        while prev[at] is not None:
            hops.append((prev[at], at))  # type: ignore[arg-type]
            at = prev[at]  # type: ignore[assignment]
        hops.reverse()
        if sum(net.length_of(h) for h in hops) > reach_km + 1e-9:
            return None
        paths[r.id] = tuple(hops)
    return paths


def _flood(links: frozenset[Link], route: tuple[Link, ...]) -> frozenset[Link]:
    """Worklist flood: copy the channel to onward links, skipping reversals."""
    flood = {route[0]}
    work = [route[0]]
    while work:
        tail = work.pop()
        for l in links:
            if l[0] == tail[1] and l not in flood and (l[1], l[0]) not in flood:
                flood.add(l)
                work.append(l)
    return frozenset(flood)


@dataclass(frozen=True)
class _Candidate:
    links: frozenset[Link]
    colors: int


def _candidates_for(
    served: tuple[int, ...],
    trees: list[frozenset[Edge]],
    tree_paths: list[dict[int, tuple[Link, ...]]],
    chroma_memo: dict,
) -> list[_Candidate]:
    """All sub-networks able to serve ``served``, one per usable tree.

    The link set is the union of the routes: broadcast flooding is only
    ever monotone in the link set, so carrying any extra fiber direction
    can only add conflicts and occupy more links.
    """
    out: dict[frozenset[Link], int] = {}
    for tree, paths in zip(trees, tree_paths):
        if any(k not in paths for k in served):
            continue
        links = frozenset(l for k in served for l in paths[k])
        floods = {k: _flood(links, paths[k]) for k in served}
        routes = {k: frozenset(paths[k]) for k in served}
        conflict_edges = set()
        for k, kp in combinations(served, 2):
            if (
                routes[k] & routes[kp]
                or routes[k] & floods[kp]
                or routes[kp] & floods[k]
            ):
                conflict_edges.add((k, kp))
        key = (served, frozenset(conflict_edges))
        if key not in chroma_memo:
            chroma_memo[key] = oracle_min_coloring(list(served), conflict_edges)
        colors = chroma_memo[key]
        if links not in out or colors < out[links]:
            out[links] = colors
    return [_Candidate(l, c) for l, c in sorted(out.items(), key=lambda t: t[1])]


def oracle_optimum(net: Network, requests: list[Request], cfg: SolverConfig) -> int:
    """Minimum wavelength count over every feasible design, by enumeration.

    Enumerates sub-network supports (all subtrees), request-to-sub-network
    assignments for up to two link-disjoint sub-networks, and colors each
    resulting conflict structure exactly.
    """
    if len(net.nodes) > 6 or len(net.edges) > 8 or len(requests) > 8:
        raise OracleLimitError("instance exceeds oracle limits (6 nodes, 8 edges, 8 requests)")
    n_fsn = cfg.max_fsn if cfg.max_fsn is not None else 2
    if n_fsn > 2:
        raise OracleLimitError("oracle handles at most 2 sub-networks")

    trees = _enumerate_subtrees(net)
    # per tree, the requests it can carry within reach and their paths
    per_tree: list[dict[int, tuple[Link, ...]]] = []
    for tree in trees:
        c: dict[int, tuple[Link, ...]] = {}
        for r in requests:
            single = _paths_on_tree(tree, [r], net, cfg.reach_km)
            if single is not None:
                c.update(single)
        per_tree.append(c)

    ids = tuple(sorted(r.id for r in requests))
    chroma_memo: dict = {}
    cand_memo: dict[tuple[int, ...], list[_Candidate]] = {}

    def candidates(served: tuple[int, ...]) -> list[_Candidate]:
        if served not in cand_memo:
            cand_memo[served] = _candidates_for(served, trees, per_tree, chroma_memo)
        return cand_memo[served]

    best: int | None = None

    def consider(value: int) -> None:
        nonlocal best
        if best is None or value < best:
            best = value

    # single sub-network
    for cand in candidates(ids):
        consider(cand.colors)
        break  # candidates are sorted by color count

    if n_fsn >= 2 and len(ids) >= 2:
        universe = list(ids)
        # slot symmetry: the first request always sits in the first slot
        for mask in range(1 << (len(universe) - 1)):
            side1 = tuple(
                universe[i]
                for i in range(len(universe))
                if i == 0 or mask >> (i - 1) & 1
            )
            side2 = tuple(k for k in universe if k not in side1)
            if not side2:
                continue
            for c1 in candidates(side1):
                if best is not None and c1.colors >= best:
                    break
                for c2 in candidates(side2):
                    if best is not None and max(c1.colors, c2.colors) >= best:
                        break
                    if not (c1.links & c2.links):
                        consider(max(c1.colors, c2.colors))
                        break
    if best is None:
        raise OracleInfeasibleError("no sub-network support can serve all requests")
    return best
