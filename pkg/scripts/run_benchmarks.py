#!/usr/bin/env python3
"""Regenerate the benchmark study on the bundled 15-arm instances.

Produces five experiment directories under --out:
  gaussian_regret_vs_n/   regret curves at rho in {1e-3, 1, 1000}
  gaussian_sweep/         regret at n across 13 log-spaced rho
  bernoulli_regret_vs_n/  regret curves at rho in {0.111, 0.444, 0.889}
  bernoulli_sweep/        regret at n across the 9-point linear rho grid
  slope_check/            2-arm pseudo-regret growth for the log-slope fit

Figures can then be rendered from the CSVs with mvbandit-plot.
"""

import argparse
import math
import time
from pathlib import Path

import numpy as np

from mvbandit.env import benchmark_bernoulli15, benchmark_gaussian15, BanditInstance, GaussianArm
from mvbandit.harness import ExperimentConfig, default_rho_grid, run_experiment, sweep_rho, write_outputs
from mvbandit.policies import PolicyKind, PolicyTag

# Baseline width (5+rho)*sqrt(log(t^2)/T): scale sqrt(2) on the package default.
LCB_SCALE = math.sqrt(2.0)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results", help="output root directory")
    parser.add_argument("--runs", type=int, default=100)
    parser.add_argument("--horizon", type=int, default=30_000)
    parser.add_argument("--seed", type=int, default=2)
    parser.add_argument("--workers", type=int, default=None)
    args = parser.parse_args()
    root = Path(args.out)

    gauss_policies = (
        PolicyKind(PolicyTag.MTS),
        PolicyKind(PolicyTag.VTS),
        PolicyKind(PolicyTag.MVTS),
        PolicyKind(PolicyTag.MV_LCB_GAUSSIAN, lcb_width_scale=LCB_SCALE),
    )
    bern_policies = (
        PolicyKind(PolicyTag.BMVTS),
        PolicyKind(PolicyTag.MV_LCB_BERNOULLI, lcb_width_scale=LCB_SCALE),
    )

    jobs = [
        (
            "gaussian_regret_vs_n",
            ExperimentConfig(
                instance=benchmark_gaussian15(),
                policies=gauss_policies,
                horizon=args.horizon,
                runs=args.runs,
                base_seed=args.seed,
                rho_grid=(1e-3, 1.0, 1000.0),
            ),
            run_experiment,
        ),
        (
            "gaussian_sweep",
            ExperimentConfig(
                instance=benchmark_gaussian15(),
                policies=(gauss_policies[2], gauss_policies[3]),
                horizon=args.horizon,
                runs=args.runs,
                base_seed=args.seed,
                rho_grid=default_rho_grid("gaussian"),
            ),
            sweep_rho,
        ),
        (
            "bernoulli_regret_vs_n",
            ExperimentConfig(
                instance=benchmark_bernoulli15(),
                policies=bern_policies,
                horizon=args.horizon,
                runs=args.runs,
                base_seed=args.seed,
                rho_grid=(0.111, 0.444, 0.889),
            ),
            run_experiment,
        ),
        (
            "bernoulli_sweep",
            ExperimentConfig(
                instance=benchmark_bernoulli15(),
                policies=bern_policies,
                horizon=args.horizon,
                runs=args.runs,
                base_seed=args.seed,
                rho_grid=default_rho_grid("bernoulli"),
            ),
            sweep_rho,
        ),
        (
            "slope_check",
            ExperimentConfig(
                instance=BanditInstance((GaussianArm(0.5, 0.1), GaussianArm(0.4, 0.3)), rho=0.01),
                policies=(PolicyKind(PolicyTag.MVTS),),
                horizon=max(args.horizon, 100_000),
                runs=2 * args.runs,
                base_seed=args.seed,
                checkpoints=tuple(
                    int(c)
                    for c in np.unique(
                        np.rint(np.geomspace(1_000, max(args.horizon, 100_000), 12)).astype(int)
                    )
                ),
            ),
            run_experiment,
        ),
    ]

    for name, config, runner in jobs:
        t0 = time.perf_counter()
        summaries = runner(config, workers=args.workers)
        wall = time.perf_counter() - t0
        out = root / name
        write_outputs(summaries, config, out, wall_clock=wall)
        print(f"{name}: {len(summaries)} (policy, rho) cells in {wall:.1f}s -> {out}")


if __name__ == "__main__":
    main()
