"""Physical network and traffic parsing.

The physical network is a set of nodes connected by fiber pairs: every
undirected edge declared in a topology file yields two directed links of
equal length, one per direction.  Traffic is a list of unit requests
(source, destination); demand files may carry multiplicities, which are
expanded into individual unit requests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

Link = tuple[str, str]
Edge = tuple[str, str]


class TopologyError(ValueError):
    """Raised for malformed topology or demand input."""


@dataclass(frozen=True)
class Request:
    """One unit of traffic from ``source`` to ``destination``."""

    id: int
    source: str
    destination: str

    def __post_init__(self) -> None:
        if self.source == self.destination:
            raise TopologyError(
                f"request {self.id}: source equals destination ({self.source})"
            )


@dataclass(frozen=True)
class SolverConfig:
    """Knobs for a design run.

    ``max_fsn`` bounds the number of selected sub-networks (None means
    unbounded).  ``reach_km`` caps the filtered source-to-destination
    route length of every request.
    """

    max_fsn: int | None = None
    reach_km: float = 1500.0
    max_cg_iterations: int = 500
    time_limit_s: float = 3600.0
    rc_tolerance: float = 1e-6
    seed: int = 0

    def __post_init__(self) -> None:
        if self.max_fsn is not None and self.max_fsn < 1:
            raise ValueError("max_fsn must be a positive integer or None")
        if not self.reach_km > 0:
            raise ValueError("reach_km must be positive")
        if self.max_cg_iterations < 1:
            raise ValueError("max_cg_iterations must be positive")
        if not self.time_limit_s > 0:
            raise ValueError("time_limit_s must be positive")
        if not self.rc_tolerance > 0:
            raise ValueError("rc_tolerance must be positive")


class Network:
    """Directed-fiber physical graph with derived undirected edges.

    Immutable after construction; node order is declaration order and is
    the tie-breaking order used everywhere downstream.
    """

    def __init__(self, nodes: list[str], edge_list: list[tuple[str, str, float]]):
        if len(set(nodes)) != len(nodes):
            raise TopologyError("duplicate node identifiers")
        self.nodes: tuple[str, ...] = tuple(nodes)
        self._index: dict[str, int] = {v: i for i, v in enumerate(self.nodes)}

        links: list[Link] = []
        edges: list[Edge] = []
        length: dict[Link, float] = {}
        seen_edges: set[Edge] = set()
        for u, v, d in edge_list:
            if u not in self._index or v not in self._index:
                raise TopologyError(f"edge {u}-{v}: unknown endpoint")
            if u == v:
                raise TopologyError(f"self-loop on node {u}")
            if d < 0 or not math.isfinite(d):
                raise TopologyError(f"edge {u}-{v}: invalid length {d}")
            e = self.edge_key(u, v)
            if e in seen_edges:
                raise TopologyError(f"duplicate edge {u}-{v}")
            seen_edges.add(e)
            edges.append(e)
            links.append((u, v))
            links.append((v, u))
            length[(u, v)] = float(d)
            length[(v, u)] = float(d)
        self.links: tuple[Link, ...] = tuple(links)
        self.edges: tuple[Edge, ...] = tuple(edges)
        self._length = length
        self._in: dict[str, tuple[Link, ...]] = {}
        self._out: dict[str, tuple[Link, ...]] = {}
        self._cocycle: dict[str, tuple[Edge, ...]] = {}
        for v in self.nodes:
            self._in[v] = tuple(l for l in self.links if l[1] == v)
            self._out[v] = tuple(l for l in self.links if l[0] == v)
            self._cocycle[v] = tuple(e for e in self.edges if v in e)

    def edge_key(self, u: str, v: str) -> Edge:
        """Unordered edge as a tuple sorted by node declaration order."""
        if self._index[u] <= self._index[v]:
            return (u, v)
        return (v, u)

    def node_index(self, v: str) -> int:
        try:
            return self._index[v]
        except KeyError:
            raise TopologyError(f"unknown node {v}") from None

    def has_node(self, v: str) -> bool:
        return v in self._index

    def length_of(self, link: Link) -> float:
        return self._length[link]

    def in_links(self, v: str) -> tuple[Link, ...]:
        self.node_index(v)
        return self._in[v]

    def out_links(self, v: str) -> tuple[Link, ...]:
        self.node_index(v)
        return self._out[v]

    def cocycle(self, v: str) -> tuple[Edge, ...]:
        self.node_index(v)
        return self._cocycle[v]

    def edge_of(self, link: Link) -> Edge:
        return self.edge_key(link[0], link[1])

    @staticmethod
    def reverse(link: Link) -> Link:
        return (link[1], link[0])

    def is_connected(self) -> bool:
        if not self.nodes:
            return False
        seen = {self.nodes[0]}
        stack = [self.nodes[0]]
        while stack:
            v = stack.pop()
            for _, w in self._out[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.nodes)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        return (
            self.nodes == other.nodes
            and self.links == other.links
            and self._length == other._length
        )

    def __repr__(self) -> str:
        return f"Network({len(self.nodes)} nodes, {len(self.links)} links)"


def incidence(net: Network, v: str) -> tuple[tuple[Link, ...], tuple[Link, ...], tuple[Edge, ...]]:
    """Incoming links, outgoing links and co-cycle (adjacent edges) of ``v``."""
    return net.in_links(v), net.out_links(v), net.cocycle(v)


def _content_lines(text: str) -> list[tuple[int, str]]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        out.append((lineno, line))
    return out


def parse_topology(text: str) -> Network:
    """Parse the plain-text topology format.

    Format: ``NODES <n>`` followed by n node-id lines, then ``EDGES <m>``
    followed by m lines ``<u> <v> <length_km>``.  Each edge line declares
    the fiber pair (both directed links).  ``#`` starts a comment.
    """
    lines = _content_lines(text)
    pos = 0

    def take(expected: str) -> tuple[int, list[str]]:
        nonlocal pos
        if pos >= len(lines):
            raise TopologyError(f"unexpected end of file, expected {expected} header")
        lineno, line = lines[pos]
        pos += 1
        parts = line.split()
        if len(parts) != 2 or parts[0].upper() != expected:
            raise TopologyError(f"line {lineno}: expected '{expected} <count>'")
        return lineno, parts

    _, header = take("NODES")
    try:
        n_nodes = int(header[1])
    except ValueError:
        raise TopologyError(f"bad node count {header[1]!r}") from None
    if n_nodes < 1:
        raise TopologyError("node count must be positive")

    nodes: list[str] = []
    for _ in range(n_nodes):
        if pos >= len(lines):
            raise TopologyError("unexpected end of file in node list")
        lineno, line = lines[pos]
        pos += 1
        parts = line.split()
        if len(parts) != 1:
            raise TopologyError(f"line {lineno}: expected a single node identifier")
        if parts[0] in nodes:
            raise TopologyError(f"line {lineno}: duplicate node {parts[0]}")
        nodes.append(parts[0])

    _, header = take("EDGES")
    try:
        n_edges = int(header[1])
    except ValueError:
        raise TopologyError(f"bad edge count {header[1]!r}") from None

    node_set = set(nodes)
    edge_list: list[tuple[str, str, float]] = []
    seen: set[frozenset[str]] = set()
    for _ in range(n_edges):
        if pos >= len(lines):
            raise TopologyError("unexpected end of file in edge list")
        lineno, line = lines[pos]
        pos += 1
        parts = line.split()
        if len(parts) != 3:
            raise TopologyError(f"line {lineno}: expected '<u> <v> <length_km>'")
        u, v, d_text = parts
        if u not in node_set or v not in node_set:
            raise TopologyError(f"line {lineno}: unknown endpoint in edge {u}-{v}")
        if u == v:
            raise TopologyError(f"line {lineno}: self-loop on node {u}")
        try:
            d = float(d_text)
        except ValueError:
            raise TopologyError(f"line {lineno}: bad length {d_text!r}") from None
        if d < 0:
            raise TopologyError(f"line {lineno}: negative length {d}")
        key = frozenset((u, v))
        if key in seen:
            raise TopologyError(f"line {lineno}: duplicate edge {u}-{v}")
        seen.add(key)
        edge_list.append((u, v, d))

    if pos != len(lines):
        lineno, line = lines[pos]
        raise TopologyError(f"line {lineno}: trailing content {line!r}")
    return Network(nodes, edge_list)


def serialize_topology(net: Network) -> str:
    """Inverse of :func:`parse_topology`; re-parsing yields an equal Network."""
    out = [f"NODES {len(net.nodes)}"]
    out.extend(net.nodes)
    out.append(f"EDGES {len(net.edges)}")
    # links come in declaration order, two per edge, forward first
    for i in range(0, len(net.links), 2):
        u, v = net.links[i]
        out.append(f"{u} {v} {net.length_of((u, v))!r}")
    return "\n".join(out) + "\n"


def parse_demands(text: str, net: Network) -> list[Request]:
    """Parse a demand file into unit requests with dense ids from 0.

    Either the single keyword ``UNIFORM`` (one request per ordered node
    pair) or lines ``<src> <dst> <multiplicity>``, each expanded into
    ``multiplicity`` unit requests.
    """
    lines = _content_lines(text)
    if not lines:
        raise TopologyError("empty demand file")
    if len(lines) == 1 and lines[0][1].upper() == "UNIFORM":
        requests = []
        for s in net.nodes:
            for d in net.nodes:
                if s != d:
                    requests.append(Request(len(requests), s, d))
        return requests

    requests = []
    for lineno, line in lines:
        parts = line.split()
        if len(parts) != 3:
            raise TopologyError(f"line {lineno}: expected '<src> <dst> <multiplicity>'")
        s, d, m_text = parts
        if not net.has_node(s):
            raise TopologyError(f"line {lineno}: unknown node {s}")
        if not net.has_node(d):
            raise TopologyError(f"line {lineno}: unknown node {d}")
        if s == d:
            raise TopologyError(f"line {lineno}: source equals destination")
        try:
            m = int(m_text)
        except ValueError:
            raise TopologyError(f"line {lineno}: bad multiplicity {m_text!r}") from None
        if m < 1:
            raise TopologyError(f"line {lineno}: multiplicity must be >= 1")
        for _ in range(m):
            requests.append(Request(len(requests), s, d))
    return requests
