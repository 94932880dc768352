"""Filterless optical network design by column generation.

Select pairwise link-disjoint tree-supported sub-networks, route every
request with broadcast propagation, and assign wavelengths, minimizing
the total wavelength count with a certified optimality gap.
"""

from .fsn_core import (
    FsnConfig,
    LoadReport,
    build_fsn_config,
    detect_conflicts,
    link_loads,
    propagate,
    route_in_tree,
    verify_fsn_config,
)
from .master import (
    ColumnPool,
    DesignError,
    DesignSolution,
    Duals,
    UncoveredRequestError,
    WavelengthConfig,
    build_rmp,
    color_reduced_cost,
    extract_duals,
    finalize,
    fsn_reduced_cost,
)
from .oracle import oracle_min_coloring, oracle_optimum
from .orchestrator import CgLog, initial_solution, run, welsh_powell
from .pricing_color import conflict_state, price_color_exact, price_color_heuristic
from .pricing_fsn import price_fsn, separate_subtours
from .topology import (
    Network,
    Request,
    SolverConfig,
    TopologyError,
    incidence,
    parse_demands,
    parse_topology,
    serialize_topology,
)

__all__ = [
    "CgLog",
    "ColumnPool",
    "DesignError",
    "DesignSolution",
    "Duals",
    "FsnConfig",
    "LoadReport",
    "Network",
    "Request",
    "SolverConfig",
    "TopologyError",
    "UncoveredRequestError",
    "WavelengthConfig",
    "build_fsn_config",
    "build_rmp",
    "color_reduced_cost",
    "conflict_state",
    "detect_conflicts",
    "extract_duals",
    "finalize",
    "fsn_reduced_cost",
    "incidence",
    "initial_solution",
    "link_loads",
    "oracle_min_coloring",
    "oracle_optimum",
    "parse_demands",
    "parse_topology",
    "price_color_exact",
    "price_color_heuristic",
    "price_fsn",
    "propagate",
    "route_in_tree",
    "run",
    "separate_subtours",
    "serialize_topology",
    "verify_fsn_config",
    "welsh_powell",
]

__version__ = "0.1.0"
