import random

import numpy as np
import pytest

from fsndesign import Network, Request, SolverConfig, build_fsn_config
from fsndesign.master import Duals

# Seven-node reference network: 11 edges, unit lengths.
FIG1_EDGES = [
    ("v1", "v2"), ("v1", "v3"), ("v1", "v5"), ("v2", "v3"), ("v2", "v7"),
    ("v3", "v4"), ("v3", "v5"), ("v3", "v7"), ("v4", "v5"), ("v4", "v6"),
    ("v4", "v7"),
]

FIG1_TEXT = "NODES 7\n" + "\n".join(f"v{i}" for i in range(1, 8)) + (
    f"\nEDGES {len(FIG1_EDGES)}\n"
    + "\n".join(f"{u} {v} 1.0" for u, v in FIG1_EDGES)
    + "\n"
)


@pytest.fixture
def fig1_net():
    return Network(
        [f"v{i}" for i in range(1, 8)], [(u, v, 1.0) for u, v in FIG1_EDGES]
    )


@pytest.fixture
def star_net():
    """The star sub-network used by the worked wavelength example:
    hub v3 joined to v1, v2, v4, v5."""
    return Network(
        ["v1", "v2", "v3", "v4", "v5"],
        [("v1", "v3", 1.0), ("v2", "v3", 1.0), ("v3", "v4", 1.0), ("v3", "v5", 1.0)],
    )


def star_requests():
    return [
        Request(0, "v1", "v3"),  # k13
        Request(1, "v5", "v3"),  # k53
        Request(2, "v3", "v5"),  # k35
        Request(3, "v2", "v1"),  # k21
        Request(4, "v1", "v2"),  # k12
        Request(5, "v4", "v2"),  # k42
        Request(6, "v3", "v4"),  # k34
    ]


@pytest.fixture
def star_reqs():
    return star_requests()


@pytest.fixture
def star_fsn(star_net, star_reqs):
    return build_fsn_config(
        star_net, star_reqs, [r.id for r in star_reqs], frozenset(star_net.edges)
    )


def zero_duals(net, requests):
    n = max((r.id for r in requests), default=-1) + 1
    ids = sorted(r.id for r in requests)
    pairs = {(a, b): 0.0 for i, a in enumerate(ids) for b in ids[i + 1:]}
    return Duals(
        u2=np.zeros(n),
        u3={l: 0.0 for l in net.links},
        u4=0.0,
        u5=pairs,
        u6=np.zeros(n),
    )


def random_instance(rng: random.Random, max_nodes=6, max_edges=8, max_requests=6):
    """Connected network with random lengths plus random unit requests."""
    n = rng.randint(2, max_nodes)
    nodes = [f"n{i}" for i in range(n)]
    edges = []
    seen = set()
    for i in range(1, n):
        j = rng.randrange(i)
        edges.append((nodes[j], nodes[i], float(rng.randint(1, 40))))
        seen.add(frozenset((nodes[j], nodes[i])))
    room = min(n * (n - 1) // 2 - (n - 1), max_edges - (n - 1))
    extra = rng.randint(0, max(0, min(3, room)))
    while extra > 0:
        u, v = rng.sample(nodes, 2)
        if frozenset((u, v)) not in seen:
            seen.add(frozenset((u, v)))
            edges.append((u, v, float(rng.randint(1, 40))))
            extra -= 1
    k = rng.randint(1, max_requests)
    requests = [Request(i, *rng.sample(nodes, 2)) for i in range(k)]
    max_fsn = rng.choice([1, 2])
    net = Network(nodes, edges)
    cfg = SolverConfig(max_fsn=max_fsn, time_limit_s=120.0, max_cg_iterations=400)
    return net, requests, cfg
