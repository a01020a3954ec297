"""Command-line driver: ``solve``, ``generate`` and ``bench``.

Exit codes: 0 success, 2 unreadable or malformed input, 3 invalid options.
"""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from .instance import (
    InstanceError, dump_instance, generate_instance, load_instance, random_instance, read_instance,
)
from .intervals import IntervalPlan, PlanError, max_edge_frames, solve_intervals
from .message_passing import SolverConfig, run
from .oracle import OracleTooLarge, exact_ldp

EXIT_OK, EXIT_INPUT, EXIT_CONFIG = 0, 2, 3


class ConfigError(ValueError):
    pass


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    d = SolverConfig()
    p.add_argument("--max-iter", type=int, default=d.max_iter)
    p.add_argument("--sep-interval", type=int, default=d.sep_interval)
    p.add_argument("--primal-interval", type=int, default=d.primal_interval)
    p.add_argument("--sep-epsilon", type=float, default=d.sep_epsilon)
    p.add_argument("--max-new-factor-ratio", type=float, default=d.max_new_factor_ratio)
    p.add_argument("--tau", type=float, default=d.tau)
    p.add_argument("--cut-ends-budget", type=int, default=d.cut_ends_budget)
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; the solver is deterministic")
    p.add_argument("--verbose", action="store_true", help="per-iteration progress on stderr")


def _config(args) -> SolverConfig:
    cfg = SolverConfig(
        max_iter=args.max_iter,
        sep_interval=args.sep_interval,
        primal_interval=args.primal_interval,
        sep_epsilon=args.sep_epsilon,
        max_new_factor_ratio=args.max_new_factor_ratio,
        tau=args.tau,
        cut_ends_budget=args.cut_ends_budget,
        verbose=args.verbose,
    )
    try:
        cfg.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="liftedpaths", description="Lifted disjoint paths solver")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve an instance file")
    solve.add_argument("instance", help="instance file, '-' for stdin")
    _add_solver_flags(solve)
    solve.add_argument("--interval-length", type=int, default=None,
                       help="solve in windows of this many frames (default 3 * max edge frames)")
    solve.add_argument("--max-edge-frames", type=int, default=None,
                       help="longest edge in frames; enables interval mode")
    solve.add_argument("--oracle", action="store_true", help="also solve exactly and print the difference")

    gen = sub.add_parser("generate", help="write a tracking-like instance with planted trajectories")
    gen.add_argument("--frames", type=int, default=6)
    gen.add_argument("--per-frame", type=int, default=3)
    gen.add_argument("--trajectories", type=int, default=2)
    gen.add_argument("--noise", type=float, default=0.3)
    gen.add_argument("--max-gap", type=int, default=2)
    gen.add_argument("--lifted-gap", type=int, default=3)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("-o", "--output", default="-")

    bench = sub.add_parser("bench", help="print the per-iteration bounds as CSV")
    bench.add_argument("instance", nargs="?", default=None, help="instance file; random instance if omitted")
    bench.add_argument("--nodes", type=int, default=12, help="size of the random instance")
    bench.add_argument("--num-frames", type=int, default=5, help="frames of the random instance")
    _add_solver_flags(bench)
    return parser


def _read(path: str):
    if path == "-":
        return load_instance(sys.stdin.read())
    return read_instance(path)


def _solve(args) -> int:
    cfg = _config(args)
    inst = _read(args.instance)
    if args.interval_length is not None or args.max_edge_frames is not None:
        t_max = args.max_edge_frames if args.max_edge_frames is not None else max_edge_frames(inst)
        length = args.interval_length if args.interval_length is not None else 3 * t_max
        try:
            sol = solve_intervals(inst, IntervalPlan(length, t_max), cfg)
        except PlanError as exc:
            raise ConfigError(str(exc)) from exc
        lb = float("-inf")  # windowed solving certifies no global bound
    else:
        report = run(inst, cfg)
        sol, lb = report.solution, report.lower_bound
    out = sys.stdout
    out.write(sol.format())
    out.write(f"lb {lb!r}\nub {sol.objective!r}\ngap {sol.objective - lb!r}\n")
    if args.oracle:
        try:
            exact = exact_ldp(inst)
        except OracleTooLarge as exc:
            raise ConfigError(str(exc)) from exc
        out.write(f"oracle {exact.objective!r}\ndifference {sol.objective - exact.objective!r}\n")
    return EXIT_OK


def _generate(args) -> int:
    for name in ("frames", "per_frame", "max_gap", "lifted_gap"):
        if getattr(args, name) < 1:
            raise ConfigError(f"--{name.replace('_', '-')} must be >= 1")
    if not 0 <= args.trajectories <= args.per_frame:
        raise ConfigError("--trajectories must lie between 0 and --per-frame")
    inst, _ = generate_instance(
        args.frames, args.per_frame, args.trajectories, args.noise, args.seed,
        max_gap=args.max_gap, lifted_gap=args.lifted_gap,
    )
    text = dump_instance(inst)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w") as fh:
            fh.write(text)
    return EXIT_OK


def _bench(args) -> int:
    cfg = _config(args)
    if args.instance is not None:
        inst = _read(args.instance)
    else:
        if args.nodes < 1 or args.num_frames < 1:
            raise ConfigError("--nodes and --num-frames must be >= 1")
        inst = random_instance(np.random.default_rng(args.seed), args.nodes, args.num_frames)
    report = run(inst, cfg)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["iteration", "lb", "ub", "gap", "factors"])
    for rec in report.history:
        writer.writerow([rec.iteration, repr(rec.lower_bound), repr(rec.best_primal),
                         repr(rec.best_primal - rec.lower_bound), rec.num_factors])
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    handler = {"solve": _solve, "generate": _generate, "bench": _bench}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InstanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
