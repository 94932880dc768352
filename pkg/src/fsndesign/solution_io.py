"""Design solution serialization, parsing, validation, and graph export.

The solution file is a versioned line-oriented text document carrying
everything needed to re-verify a design against its topology: per
sub-network the tree, the directed links, and each request's route and
flood; plus the per-request wavelength assignment and the load table.
"""

from __future__ import annotations

from dataclasses import dataclass

from .fsn_core import (
    FsnConfig,
    conflicts_from_provisioning,
    link_loads,
    verify_fsn_config,
)
from .master import DesignSolution
from .topology import Link, Network, Request, TopologyError

FORMAT_TAG = "FILTERLESS-DESIGN 1"


def _link_token(link: Link) -> str:
    return f"{link[0]}>{link[1]}"


def _parse_link(token: str, lineno: int) -> Link:
    parts = token.split(">")
    if len(parts) != 2 or not parts[0] or not parts[1]:
        raise TopologyError(f"line {lineno}: bad link token {token!r}")
    return (parts[0], parts[1])


def design_to_text(design: DesignSolution, net: Network, requests: list[Request]) -> str:
    out = [FORMAT_TAG]
    out.append(f"WAVELENGTHS {design.wavelengths}")
    out.append(f"LP_BOUND {design.z_lp!r}")
    out.append(f"EPSILON {design.epsilon!r}")
    out.append(f"CERTIFIED {'yes' if design.certified else 'no'}")
    out.append(f"FSNS {len(design.selected_fsns)}")
    for idx, cfg in enumerate(design.selected_fsns):
        out.append(f"FSN {idx}")
        for e in sorted(cfg.tree_edges, key=lambda e: (net.node_index(e[0]), net.node_index(e[1]))):
            out.append(f"TREE {e[0]} {e[1]}")
        for l in sorted(cfg.links, key=lambda l: (net.node_index(l[0]), net.node_index(l[1]))):
            out.append(f"LINK {l[0]} {l[1]}")
        for k in cfg.served:
            out.append(f"ROUTE {k} " + " ".join(_link_token(h) for h in cfg.routes[k]))
            flood = sorted(
                cfg.propagation[k],
                key=lambda l: (net.node_index(l[0]), net.node_index(l[1])),
            )
            out.append(f"FLOOD {k} " + " ".join(_link_token(l) for l in flood))
        out.append("ENDFSN")
    for r in requests:
        out.append(
            f"ASSIGN {r.id} {design.serving[r.id]} {design.wavelength_assignment[r.id]}"
        )
    out.append("LOADS")
    for link in net.links:
        f = design.loads.filtered.get(link, 0)
        t = design.loads.total.get(link, 0)
        if f or t:
            out.append(f"LOAD {link[0]} {link[1]} {f} {t}")
    out.append("END")
    return "\n".join(out) + "\n"


@dataclass
class ParsedDesign:
    wavelengths: int
    z_lp: float
    epsilon: float
    certified: bool
    fsns: list[FsnConfig]
    serving: dict[int, int]
    wavelength_assignment: dict[int, int]
    loads: dict[Link, tuple[int, int]]


def parse_design(text: str, net: Network) -> ParsedDesign:
    lines = [
        (no, line.strip())
        for no, line in enumerate(text.splitlines(), start=1)
        if line.strip() and not line.strip().startswith("#")
    ]
    if not lines or lines[0][1] != FORMAT_TAG:
        raise TopologyError(f"missing format tag {FORMAT_TAG!r}")
    header: dict[str, str] = {}
    pos = 1
    while pos < len(lines):
        no, line = lines[pos]
        key = line.split()[0]
        if key == "FSN":
            break
        parts = line.split(None, 1)
        if len(parts) != 2:
            raise TopologyError(f"line {no}: bad header line {line!r}")
        header[parts[0]] = parts[1]
        pos += 1

    try:
        wavelengths = int(header["WAVELENGTHS"])
        z_lp = float(header["LP_BOUND"])
        epsilon = float(header["EPSILON"])
        certified = header["CERTIFIED"].lower() == "yes"
        n_fsns = int(header["FSNS"])
    except KeyError as missing:
        raise TopologyError(f"missing header field {missing}") from None

    fsns: list[FsnConfig] = []
    serving: dict[int, int] = {}
    assignment: dict[int, int] = {}
    loads: dict[Link, tuple[int, int]] = {}
    current: dict | None = None

    def close_fsn() -> None:
        nonlocal current
        assert current is not None
        routes = current["routes"]
        floods = current["floods"]
        tree = frozenset(current["tree"])
        fsns.append(
            FsnConfig(
                tree_edges=tree,
                nodes=frozenset(v for e in tree for v in e),
                links=frozenset(current["links"]),
                served=tuple(sorted(routes)),
                routes=routes,
                propagation=floods,
                conflicts=conflicts_from_provisioning(routes, floods),
            )
        )
        current = None

    for no, line in lines[pos:]:
        parts = line.split()
        tag = parts[0]
        if tag == "FSN":
            if current is not None:
                raise TopologyError(f"line {no}: FSN block not closed")
            current = {"tree": [], "links": [], "routes": {}, "floods": {}}
        elif tag == "TREE":
            if current is None or len(parts) != 3:
                raise TopologyError(f"line {no}: stray TREE line")
            current["tree"].append(net.edge_key(parts[1], parts[2]))
        elif tag == "LINK":
            if current is None or len(parts) != 3:
                raise TopologyError(f"line {no}: stray LINK line")
            current["links"].append((parts[1], parts[2]))
        elif tag == "ROUTE":
            if current is None or len(parts) < 3:
                raise TopologyError(f"line {no}: stray ROUTE line")
            k = int(parts[1])
            current["routes"][k] = tuple(_parse_link(t, no) for t in parts[2:])
        elif tag == "FLOOD":
            if current is None or len(parts) < 3:
                raise TopologyError(f"line {no}: stray FLOOD line")
            k = int(parts[1])
            current["floods"][k] = frozenset(_parse_link(t, no) for t in parts[2:])
        elif tag == "ENDFSN":
            if current is None:
                raise TopologyError(f"line {no}: ENDFSN without FSN")
            close_fsn()
        elif tag == "ASSIGN":
            if len(parts) != 4:
                raise TopologyError(f"line {no}: bad ASSIGN line")
            assignment[int(parts[1])] = int(parts[3])
            serving[int(parts[1])] = int(parts[2])
        elif tag == "LOAD":
            if len(parts) != 5:
                raise TopologyError(f"line {no}: bad LOAD line")
            loads[(parts[1], parts[2])] = (int(parts[3]), int(parts[4]))
        elif tag == "LOADS" or tag == "END":
            continue
        else:
            raise TopologyError(f"line {no}: unknown tag {tag!r}")
    if current is not None:
        raise TopologyError("unterminated FSN block")
    if len(fsns) != n_fsns:
        raise TopologyError(f"header declares {n_fsns} sub-networks, file has {len(fsns)}")
    return ParsedDesign(
        wavelengths, z_lp, epsilon, certified, fsns, serving, assignment, loads
    )


def validate_design(
    parsed: ParsedDesign,
    net: Network,
    requests: list[Request] | None = None,
    reach_km: float = 1500.0,
) -> list[str]:
    """Re-verify a parsed design; empty list means the file is consistent.

    When ``requests`` is omitted they are reconstructed from the routes.
    """
    problems: list[str] = []
    if requests is None:
        requests = []
        for cfg in parsed.fsns:
            for k, route in cfg.routes.items():
                if route and all(k != r.id for r in requests):
                    requests.append(Request(k, route[0][0], route[-1][1]))
    for idx, cfg in enumerate(parsed.fsns):
        for v in verify_fsn_config(cfg, net, requests, reach_km):
            problems.append(f"sub-network {idx}: {v}")
    seen: set[Link] = set()
    for idx, cfg in enumerate(parsed.fsns):
        overlap = seen & cfg.links
        if overlap:
            problems.append(f"sub-network {idx}: links {sorted(overlap)} reused")
        seen |= cfg.links

    for k, fsn_idx in parsed.serving.items():
        if not 0 <= fsn_idx < len(parsed.fsns):
            problems.append(f"request {k}: serving sub-network {fsn_idx} out of range")
        elif k not in parsed.fsns[fsn_idx].served:
            problems.append(f"request {k}: not served by sub-network {fsn_idx}")
        if k not in parsed.wavelength_assignment:
            problems.append(f"request {k}: no wavelength assigned")

    used = set(parsed.wavelength_assignment.values())
    if used and (min(used) < 0 or len(used) > parsed.wavelengths):
        problems.append(
            f"assignment uses {len(used)} wavelengths, header declares {parsed.wavelengths}"
        )
    for idx, cfg in enumerate(parsed.fsns):
        for k, kp in cfg.conflicts:
            if parsed.serving.get(k) == idx and parsed.serving.get(kp) == idx:
                if parsed.wavelength_assignment.get(k) == parsed.wavelength_assignment.get(kp):
                    problems.append(
                        f"conflicting requests {k},{kp} share wavelength "
                        f"{parsed.wavelength_assignment.get(k)}"
                    )
    expected = link_loads(
        parsed.fsns, parsed.wavelength_assignment, parsed.serving
    ) if not problems else None
    if expected is not None:
        for link, (f, t) in parsed.loads.items():
            if expected.filtered.get(link, 0) != f or expected.total.get(link, 0) != t:
                problems.append(
                    f"load mismatch on {link}: file {f}/{t}, "
                    f"recomputed {expected.filtered.get(link, 0)}/{expected.total.get(link, 0)}"
                )
    return problems


def design_to_dot(design: DesignSolution, net: Network) -> str:
    """Graph export with per-link 'filtered/unfiltered' wavelength labels."""
    palette = ["red", "blue", "green", "orange", "purple", "brown", "cyan"]
    out = ["digraph design {", "  rankdir=LR;"]
    for v in net.nodes:
        out.append(f'  "{v}";')
    for idx, cfg in enumerate(design.selected_fsns):
        color = palette[idx % len(palette)]
        for link in sorted(cfg.links, key=lambda l: (net.node_index(l[0]), net.node_index(l[1]))):
            f = design.loads.filtered.get(link, 0)
            u = design.loads.total.get(link, 0) - f
            out.append(
                f'  "{link[0]}" -> "{link[1]}" [label="{f}/{u}", color={color}];'
            )
    out.append("}")
    return "\n".join(out) + "\n"
