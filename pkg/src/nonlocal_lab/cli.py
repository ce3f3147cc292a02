"""Command-line front end: ``nonlocal-lab <experiment> [options]``.

Exit codes: 0 on success, 2 on usage/configuration errors, 1 on runtime
failures (I/O, statistical preconditions).
"""

from __future__ import annotations

import argparse
import sys

from .harness import EXPERIMENTS, ExperimentConfig, emit_table, run_experiment


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nonlocal-lab",
        description="Simulation and inference experiments for nonlocal-box channels.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        group = p.add_mutually_exclusive_group()
        group.add_argument("--c", type=float, default=None,
                           help="box CHSH correlation in [-1, 1]")
        group.add_argument("--c2", type=float, default=None,
                           help="squared correlation in [0, 1] (exact boundary input)")
        p.add_argument("--c-prime", type=float, default=1.0,
                       help="classical-link base correlation (default 1)")
        p.add_argument("--theta", type=float, default=0.0,
                       help="source parameter (default 0)")
        p.add_argument("--n-min", type=int, default=1, help="first level count")
        p.add_argument("--n-max", type=int, default=4, help="last level count")
        p.add_argument("--trials", type=int, default=10_000,
                       help="trials or samples per sweep point")
        p.add_argument("--seed", type=int, default=0, help="64-bit master seed")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", default="-", help="output path, '-' for stdout")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = ExperimentConfig(
            experiment=args.experiment, c=args.c, c2=args.c2,
            c_prime=args.c_prime, theta=args.theta, n_min=args.n_min,
            n_max=args.n_max, trials=args.trials, seed=args.seed,
            format=args.format, out=args.out,
        )
    except ValueError as exc:
        print(f"nonlocal-lab: configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        table = run_experiment(cfg)
        emit_table(table, cfg.format, cfg.out)
    except (OSError, ValueError) as exc:
        print(f"nonlocal-lab: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
