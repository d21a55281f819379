"""Command-line entry point.

Exit codes: 0 success, 1 invalid input, 2 failed cross-validation.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import analytic, figures, recurrence
from .harness import ConfigError, ExperimentConfig, cross_validate, run_experiment

EXIT_OK, EXIT_INVALID, EXIT_CHECK_FAILED = 0, 1, 2


def _common(p: argparse.ArgumentParser, *, length=True, trials=True):
    if length:
        p.add_argument("--length", "-L", type=float, nargs="+", help="segment length(s)")
    if trials:
        p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output file or directory")
    p.add_argument("--log-base", choices=("e", "2"), default="e")


def _print_summaries(summaries, out):
    for s in summaries:
        print(f"{s.statistic:>24s}  L={s.L:<8g} mean={s.mean:.6g}  var={s.variance:.4g}  ci95=±{s.ci_halfwidth:.3g}")
    if out:
        print(f"wrote {out}")


def _simulate(args, process: str, mode: str) -> int:
    if not args.length:
        raise ConfigError("length", "is required")
    cfg = ExperimentConfig(process=process, L=args.length, trials=args.trials, master_seed=args.seed,
                           statistics=args.stat, mode=mode, out=args.out, raw=args.raw, workers=args.workers,
                           boundary_gaps=args.boundary_gaps)
    _print_summaries(run_experiment(cfg), args.out)
    return EXIT_OK


def cmd_classical(args) -> int:
    return _simulate(args, "classical", args.mode)


def cmd_ghost(args) -> int:
    return _simulate(args, f"ghost-{args.geometry}", args.mode)


def cmd_twod(args) -> int:
    process = {"classical": "2d-classical", "ghost": "2d-ghost", "ghost-then-classical": "2d-ghost-then-classical"}
    return _simulate(args, process[args.process], args.geometry)


def cmd_solve(args) -> int:
    what = args.quantity
    if what == "alpha":
        print(repr(recurrence.renyi_alpha(args.tolerance)))
        return EXIT_OK
    L = args.length[0] if args.length else 100.0
    if what == "density":
        table = recurrence.solve_density(L, args.step)
    elif what == "gaps":
        table = recurrence.solve_gap_expectation(args.r, L, args.step)
    elif what == "second-moment":
        table = recurrence.solve_second_moment_bound(args.r, L, args.step)
    elif what == "retention":
        table = recurrence.solve_retention(L, min(args.step, 0.01))
    else:
        table, lam = recurrence.solve_h_and_lambda(args.r, L, args.step)
        c = recurrence.limit_coefficient_c(args.r, L, args.step)
        print(f"lambda_{args.r} = {lam.value!r} (residual {lam.residual:.2g} at L={lam.at_arg:g})")
        print(f"c_{args.r} = {c.value!r} (residual {c.residual:.2g} at L={c.at_arg:g})")
    print(f"{table.name}: value at {table.max_arg:g} = {float(table.values[-1])!r}, est. error {table.est_error:.2g}")
    if args.out:
        table.to_csv(args.out)
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_analytic(args) -> int:
    what = args.quantity
    L = args.length[0] if args.length else 20.0
    if what == "success-prob":
        print(repr(analytic.success_prob(args.t, L)))
    elif what == "ghost-density":
        print(repr(analytic.expected_rods_ghost(L, args.geometry)))
    elif what == "occupancy":
        print(repr(analytic.occupancy(args.x, L)))
    else:
        fn = analytic.pair_correlation_circle_exact if args.exact else analytic.pair_correlation_circle
        print(repr(fn(args.x)))
    return EXIT_OK


def cmd_figure(args) -> int:
    params = {"seed": args.seed}
    if args.trials:
        params["trials"] = args.trials
    if args.figure == "fig2":
        params["log_base"] = args.log_base
    path = figures.figure_data(args.figure, args.out or f"{args.figure}.csv", **params)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    overrides = {
        "trials": args.trials,
        "master_seed": args.seed,
        "out": args.out,
        "L": args.length,
        "mode": args.mode,
        "workers": args.workers,
    }
    cfg = ExperimentConfig.from_yaml(args.config, **overrides)
    _print_summaries(run_experiment(cfg), cfg.out)
    return EXIT_OK


def cmd_cross_validate(args) -> int:
    L = args.length[0] if args.length else 10.0
    report = cross_validate(args.r, L, args.trials, args.seed, args.step)
    print("\n".join(report.lines()))
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({**report.__dict__, "passed": report.passed}, fh, indent=2)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rsagaps", description="Random sequential packing: classical and ghost.")
    sub = parser.add_subparsers(dest="command", required=True)

    def sim_parser(name, help_):
        p = sub.add_parser(name, help=help_)
        _common(p)
        p.add_argument("--stat", action="append", default=None,
                       help="statistic, e.g. rod_count, max_gap, gap_count_at(1.5); repeatable")
        p.add_argument("--raw", action="store_true", help="also write raw.jsonl")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--boundary-gaps", action=argparse.BooleanOptionalAction, default=None,
                       help="count gaps touching the ends (default: on for classical, off for ghost)")
        return p

    p = sim_parser("classical", "saturated classical packing")
    p.add_argument("--mode", choices=("split", "naive"), default="split")
    p.set_defaults(func=cmd_classical)

    p = sim_parser("ghost", "ghost packing")
    p.add_argument("--mode", choices=("accelerated", "naive"), default="accelerated")
    p.add_argument("--geometry", choices=("interval", "circle"), default="interval")
    p.set_defaults(func=cmd_ghost)

    p = sim_parser("twod", "2D square packing")
    p.add_argument("--process", choices=("classical", "ghost", "ghost-then-classical"), default="classical")
    p.add_argument("--geometry", choices=("boxed", "torus"), default="boxed")
    p.set_defaults(func=cmd_twod)

    p = sub.add_parser("solve", help="numerical solvers")
    p.add_argument("quantity", choices=("alpha", "density", "gaps", "h-lambda", "second-moment", "retention"))
    _common(p, trials=False)
    p.add_argument("-r", type=float, default=1.0, help="gap threshold")
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--tolerance", type=float, default=1e-8)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("analytic", help="closed-form ghost quantities")
    p.add_argument("quantity", choices=("success-prob", "ghost-density", "occupancy", "paircorr"))
    _common(p, trials=False)
    p.add_argument("-t", type=int, default=1)
    p.add_argument("-x", type=float, default=1.0)
    p.add_argument("--geometry", choices=("interval", "circle"), default="interval")
    p.add_argument("--exact", action="store_true", help="pair correlation from the two-rod separation law")
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("figure", help="emit figure data as CSV")
    p.add_argument("figure", choices=figures.FIGURES)
    _common(p, length=False)
    p.set_defaults(func=cmd_figure, trials=None)

    p = sub.add_parser("experiment", help="run a YAML-configured experiment")
    p.add_argument("--config", required=True)
    _common(p)
    p.add_argument("--mode")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_experiment, trials=None, seed=None)

    p = sub.add_parser("cross-validate", help="solver f_r(L) against simulation")
    _common(p)
    p.add_argument("-r", type=float, required=True)
    p.add_argument("--step", type=float, default=0.01)
    p.set_defaults(func=cmd_cross_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "stat", "absent") is None:
        args.stat = ["rod_count"]
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
