"""Command-line interface: simulate, sweep-rho, bounds, selfcheck."""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

from . import __version__
from .bounds import asymptotic_regret_coefficient
from .env import load_instance
from .harness import (
    ExperimentConfig,
    load_config,
    resolve_workers,
    run_experiment,
    sweep_rho,
    write_outputs,
)
from .policies import PolicyKind, PolicyTag
from .selfcheck import run_selfcheck

_TAG_NAMES = {t.value: t for t in PolicyTag}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mvbandit", description=__doc__)
    parser.add_argument("--version", action="version", version=f"mvbandit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="experiment config JSON")
        p.add_argument("--runs", type=int, help="override the config's run count")
        p.add_argument("--seed", type=int, help="override the config's base seed")
        p.add_argument("--out", help="override the config's output directory")
        p.add_argument("--dump-runs", action="store_true", help="also write per-run regret rows")
        p.add_argument(
            "--dump-posteriors", action="store_true", help="also write final posterior states"
        )
        p.add_argument(
            "--engine",
            choices=("fast", "reference"),
            default="fast",
            help="simulation engine (both give identical results)",
        )
        p.add_argument("--workers", type=int, help="worker processes (default: MVBANDIT_THREADS or all CPUs)")

    p_sim = sub.add_parser("simulate", help="run one experiment and write CSV summaries")
    add_run_args(p_sim)
    p_sweep = sub.add_parser("sweep-rho", help="run the experiment across a rho grid")
    add_run_args(p_sweep)

    p_bounds = sub.add_parser("bounds", help="print asymptotic regret coefficients")
    p_bounds.add_argument("--instance", required=True, help="instance JSON file")
    p_bounds.add_argument(
        "--policy", required=True, choices=("mts", "vts", "mvts", "bmvts"), help="policy tag"
    )
    p_bounds.add_argument("--json", action="store_true", help="print JSON only")

    p_check = sub.add_parser("selfcheck", help="run the built-in verification suites")
    p_check.add_argument("--quick", action="store_true", help="reduced grids, runs in seconds")
    return parser


def _apply_overrides(config: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    if args.runs is None and args.seed is None and args.out is None:
        return config
    return ExperimentConfig(
        instance=config.instance,
        policies=config.policies,
        horizon=config.horizon,
        runs=args.runs if args.runs is not None else config.runs,
        base_seed=args.seed if args.seed is not None else config.base_seed,
        checkpoints=config.checkpoints,
        rho_grid=config.rho_grid,
        output_dir=Path(args.out) if args.out is not None else config.output_dir,
    )


def _run_command(args: argparse.Namespace, sweep: bool) -> int:
    config = _apply_overrides(load_config(args.config), args)
    out_dir = config.output_dir
    if out_dir is None:
        print("error: no output directory (set output_dir in the config or pass --out)", file=sys.stderr)
        return 2
    keep = args.dump_runs or args.dump_posteriors
    t0 = time.perf_counter()
    if sweep:
        summaries = sweep_rho(config, engine=args.engine, workers=args.workers)
    else:
        summaries = run_experiment(
            config, engine=args.engine, workers=args.workers, keep_runs=keep
        )
    wall = time.perf_counter() - t0
    files = write_outputs(
        summaries,
        config,
        out_dir,
        dump_runs=args.dump_runs,
        dump_posteriors=args.dump_posteriors,
        wall_clock=wall,
    )
    cells = {(s.label, s.rho) for s in summaries}
    print(
        f"simulated {len(cells)} (policy, rho) cells x {config.runs} runs "
        f"(horizon {config.horizon}) in {wall:.1f}s with {resolve_workers(args.workers)} workers"
    )
    for f in files:
        print(f"wrote {f}")
    return 0


def _bounds_command(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    kind = PolicyKind(tag=_TAG_NAMES[args.policy])
    report = asymptotic_regret_coefficient(kind, instance)
    if args.json:
        print(json.dumps(report.to_dict()))
        return 0
    print(f"policy: {report.policy}   rho: {instance.rho}   best arm: {report.best_arm}")
    print(f"{'arm':>4} {'coefficient':>14} {'assumptions_ok':>15}")
    for i, (c, ok) in enumerate(zip(report.per_arm, report.assumptions_ok)):
        tag = " (best)" if i == report.best_arm else ""
        print(f"{i:>4} {c:>14.6g} {str(ok):>15}{tag}")
    print(f"total log(n) coefficient: {report.total_coefficient:.6g}")
    if report.limit_rho_inf is not None:
        print(f"large-rho limit (per rho*log n): {report.limit_rho_inf:.6g}")
        print(f"small-rho limit (per log n): {report.limit_rho_0:.6g}")
    for w in report.warnings:
        print(f"warning: {w}")
    if not math.isfinite(report.total_coefficient):
        print("warning: total coefficient is infinite; the bound is vacuous for this instance")
    print(json.dumps(report.to_dict()))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "simulate":
        return _run_command(args, sweep=False)
    if args.command == "sweep-rho":
        return _run_command(args, sweep=True)
    if args.command == "bounds":
        return _bounds_command(args)
    if args.command == "selfcheck":
        results = run_selfcheck(quick=args.quick)
        return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
