"""Command-line front door: solve, validate, oracle-check, and batch runs.

Exit codes: 0 success/valid, 1 invalid input, 2 infeasible instance,
3 limit-terminated (result reported but not certified).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time

from . import oracle as oracle_mod
from . import solution_io
from .master import DesignError, UncoveredRequestError
from .orchestrator import run
from .topology import Network, SolverConfig, TopologyError, parse_demands, parse_topology

TIME_LIMIT_ENV = "FSNDESIGN_TIME_LIMIT"

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INFEASIBLE = 2
EXIT_LIMIT = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D102 - argparse hook
        raise _UsageError(f"{message}\n{self.format_usage()}")


def _default_time_limit() -> float:
    raw = os.environ.get(TIME_LIMIT_ENV)
    if raw:
        try:
            return float(raw)
        except ValueError:
            raise _UsageError(f"bad {TIME_LIMIT_ENV} value {raw!r}") from None
    return 3600.0


def _build_parser() -> _Parser:
    p = _Parser(prog="fsndesign", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="design a filterless network")
    solve.add_argument("topology", help="topology file")
    solve.add_argument("demands", help="demand file")
    _solver_flags(solve)
    solve.add_argument("--out", help="write the solution file here (default stdout)")
    solve.add_argument("--dot", help="write a graph export here")
    solve.add_argument("--log", help="write the machine-readable iteration log here")
    solve.add_argument("--dump-models", help="dump every LP/ILP model into this directory")

    val = sub.add_parser("validate", help="re-verify a solution file")
    val.add_argument("solution", help="solution file")
    val.add_argument("topology", help="topology file")
    val.add_argument("--reach-km", type=float, default=1500.0)

    orc = sub.add_parser("oracle", help="brute-force optimum of a tiny instance")
    orc.add_argument("topology")
    orc.add_argument("demands")
    orc.add_argument("--max-fsn", type=int, default=None)
    orc.add_argument("--reach-km", type=float, default=1500.0)

    bench = sub.add_parser("bench", help="run every instance in a directory")
    bench.add_argument("directory", help="directory of <name>.top / <name>.dem pairs")
    _solver_flags(bench)
    return p


def _solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-fsn", type=int, default=None, help="cap on sub-networks (default unbounded)")
    p.add_argument("--reach-km", type=float, default=1500.0, help="optical reach bound (default 1500)")
    p.add_argument("--max-iters", type=int, default=500, help="column-generation iteration cap (default 500)")
    p.add_argument(
        "--time-limit",
        type=float,
        default=None,
        help=f"wall-clock budget in seconds (default 3600, or ${TIME_LIMIT_ENV})",
    )
    p.add_argument("--seed", type=int, default=0, help="seed recorded in the run config (default 0)")


def _config(args: argparse.Namespace) -> SolverConfig:
    time_limit = args.time_limit if args.time_limit is not None else _default_time_limit()
    return SolverConfig(
        max_fsn=args.max_fsn,
        reach_km=args.reach_km,
        max_cg_iterations=args.max_iters,
        time_limit_s=time_limit,
        seed=args.seed,
    )


def _load_instance(topology_path: str, demands_path: str) -> tuple[Network, list]:
    with open(topology_path, encoding="utf-8") as fh:
        net = parse_topology(fh.read())
    with open(demands_path, encoding="utf-8") as fh:
        requests = parse_demands(fh.read(), net)
    return net, requests


def _cmd_solve(args: argparse.Namespace) -> int:
    net, requests = _load_instance(args.topology, args.demands)
    cfg = _config(args)
    design, cg = run(net, requests, cfg, dump_dir=args.dump_models)
    text = solution_io.design_to_text(design, net, requests)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(solution_io.design_to_dot(design, net))
    if args.log:
        with open(args.log, "w", encoding="utf-8") as fh:
            fh.write(cg.to_json())
    print(
        f"# W={design.wavelengths} z_lp={design.z_lp:.6f} epsilon={design.epsilon:.6f} "
        f"certified={'yes' if design.certified else 'no'} "
        f"iterations={len(cg.records)} time={cg.wall_time_s:.2f}s",
        file=sys.stderr,
    )
    return EXIT_OK if design.certified else EXIT_LIMIT


def _cmd_validate(args: argparse.Namespace) -> int:
    with open(args.topology, encoding="utf-8") as fh:
        net = parse_topology(fh.read())
    with open(args.solution, encoding="utf-8") as fh:
        parsed = solution_io.parse_design(fh.read(), net)
    problems = solution_io.validate_design(parsed, net, reach_km=args.reach_km)
    for p in problems:
        print(p, file=sys.stderr)
    if problems:
        return EXIT_INVALID
    print(f"valid: {len(parsed.fsns)} sub-networks, {parsed.wavelengths} wavelengths")
    return EXIT_OK


def _cmd_oracle(args: argparse.Namespace) -> int:
    net, requests = _load_instance(args.topology, args.demands)
    cfg = SolverConfig(max_fsn=args.max_fsn, reach_km=args.reach_km)
    try:
        w = oracle_mod.oracle_optimum(net, requests, cfg)
    except oracle_mod.OracleInfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    print(f"W* = {w}")
    return EXIT_OK


def _cmd_bench(args: argparse.Namespace) -> int:
    cfg = _config(args)
    names = sorted(
        f[:-4]
        for f in os.listdir(args.directory)
        if f.endswith(".top") and os.path.exists(os.path.join(args.directory, f[:-4] + ".dem"))
    )
    if not names:
        print(f"no <name>.top/<name>.dem pairs in {args.directory}", file=sys.stderr)
        return EXIT_INVALID
    print(f"{'instance':<16} {'z_lp':>10} {'W':>5} {'eps':>8} {'loadR':>6} {'loadN':>6} {'cert':>5} {'time_s':>8}")
    worst = EXIT_OK
    for name in names:
        t0 = time.monotonic()
        try:
            net, requests = _load_instance(
                os.path.join(args.directory, name + ".top"),
                os.path.join(args.directory, name + ".dem"),
            )
            design, _ = run(net, requests, cfg)
        except (DesignError, TopologyError) as exc:
            print(f"{name:<16} failed: {exc}")
            worst = max(worst, EXIT_INFEASIBLE)
            continue
        elapsed = time.monotonic() - t0
        print(
            f"{name:<16} {design.z_lp:>10.4f} {design.wavelengths:>5} "
            f"{design.epsilon:>8.4f} {design.loads.max_filtered:>6} "
            f"{design.loads.max_total:>6} {'yes' if design.certified else 'no':>5} {elapsed:>8.2f}"
        )
        if not design.certified:
            worst = max(worst, EXIT_LIMIT)
    return worst


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args = _build_parser().parse_args(argv)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INVALID
    try:
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "oracle":
            return _cmd_oracle(args)
        if args.command == "bench":
            return _cmd_bench(args)
        return EXIT_INVALID
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INVALID
    except FileNotFoundError as exc:
        print(f"cannot open {exc.filename}", file=sys.stderr)
        return EXIT_INVALID
    except (TopologyError, oracle_mod.OracleLimitError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except UncoveredRequestError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except DesignError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


def console_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
