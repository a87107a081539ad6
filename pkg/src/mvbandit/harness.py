"""Experiment orchestration.

Ingests a JSON config, replicates seeded Monte Carlo runs across a worker
pool, aggregates checkpointed regret by streaming (count, mean, M2), and
persists CSV summaries plus a JSON manifest. Output rows are a pure
function of the config: results are reduced in canonical (policy, rho,
run) order regardless of scheduling.
"""

from __future__ import annotations

import json
import multiprocessing
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .env import BanditInstance, gap_table, instance_from_dict, instance_to_dict, load_instance
from .policies import PolicyKind, PolicyTag
from .rng import ROLE_ENV, ROLE_POLICY, derive_stream, stream_key
from .simulate import RunResult, simulate_run

__all__ = [
    "ExperimentConfig",
    "CheckpointStats",
    "RegretSummary",
    "default_checkpoints",
    "default_rho_grid",
    "load_config",
    "run_experiment",
    "sweep_rho",
    "write_outputs",
]

_CONFIG_KEYS = {
    "instance",
    "policies",
    "horizon",
    "runs",
    "base_seed",
    "checkpoints",
    "rho_grid",
    "output_dir",
}
_POLICY_KEYS = {"policy", "mts_variance_estimator", "lcb_width_scale"}
_POLICY_NAMES = {
    "mts": PolicyTag.MTS,
    "vts": PolicyTag.VTS,
    "mvts": PolicyTag.MVTS,
    "bmvts": PolicyTag.BMVTS,
}


def default_checkpoints(n_arms: int, horizon: int, count: int = 60) -> tuple[int, ...]:
    """Logarithmically spaced checkpoint grid in [K, n], ending at n."""
    lo = min(n_arms, horizon)
    if lo >= horizon:
        return (horizon,)
    grid = np.unique(np.rint(np.geomspace(lo, horizon, count)).astype(np.int64))
    grid[-1] = horizon
    return tuple(int(c) for c in np.unique(grid))


def default_rho_grid(family: str) -> tuple[float, ...]:
    """Sweep defaults: 13 log-spaced points for Gaussian, 9 linear for Bernoulli."""
    if family == "gaussian":
        return tuple(float(r) for r in np.logspace(-3.0, 3.0, 13))
    return tuple(float(r) for r in np.linspace(0.111, 0.889, 9))


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment description; validated at construction."""

    instance: BanditInstance
    policies: tuple[PolicyKind, ...]
    horizon: int
    runs: int
    base_seed: int
    checkpoints: tuple[int, ...] = ()
    rho_grid: tuple[float, ...] | None = None
    output_dir: Path | None = None

    def __post_init__(self) -> None:
        if self.horizon < self.instance.n_arms:
            raise ValueError(
                f"horizon {self.horizon} is smaller than the number of arms {self.instance.n_arms}"
            )
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")
        if not self.policies:
            raise ValueError("at least one policy is required")
        for kind in self.policies:
            kind.check_family(self.instance)
        cps = self.checkpoints or default_checkpoints(self.instance.n_arms, self.horizon)
        cps = tuple(int(c) for c in cps)
        if any(b <= a for a, b in zip(cps, cps[1:])):
            raise ValueError("checkpoints must be strictly increasing")
        if cps[0] < 1 or cps[-1] != self.horizon:
            raise ValueError(f"checkpoints must lie in [1, horizon] and end at horizon={self.horizon}")
        object.__setattr__(self, "checkpoints", cps)
        if self.rho_grid is not None:
            grid = tuple(float(r) for r in self.rho_grid)
            if not grid:
                raise ValueError("rho_grid must be nonempty when given")
            if any(r < 0 for r in grid):
                raise ValueError("rho values must be >= 0")
            object.__setattr__(self, "rho_grid", grid)

    @property
    def rhos(self) -> tuple[float, ...]:
        return self.rho_grid if self.rho_grid is not None else (self.instance.rho,)

    def to_dict(self) -> dict:
        return {
            "instance": instance_to_dict(self.instance),
            "policies": [
                {
                    "policy": _policy_name(k.tag),
                    "mts_variance_estimator": k.mts_variance_estimator,
                    "lcb_width_scale": k.lcb_width_scale,
                }
                for k in self.policies
            ],
            "horizon": self.horizon,
            "runs": self.runs,
            "base_seed": self.base_seed,
            "checkpoints": list(self.checkpoints),
            "rho_grid": list(self.rhos),
            "output_dir": str(self.output_dir) if self.output_dir else None,
        }


def _policy_name(tag: PolicyTag) -> str:
    if tag in (PolicyTag.MV_LCB_GAUSSIAN, PolicyTag.MV_LCB_BERNOULLI):
        return "mv_lcb"
    return tag.value


def _parse_policy(block: dict, family: str) -> PolicyKind:
    unknown = set(block) - _POLICY_KEYS
    if unknown:
        raise ValueError(f"unknown policy keys: {sorted(unknown)}")
    name = block.get("policy")
    if name in _POLICY_NAMES:
        tag = _POLICY_NAMES[name]
    elif name == "mv_lcb":
        tag = PolicyTag.MV_LCB_GAUSSIAN if family == "gaussian" else PolicyTag.MV_LCB_BERNOULLI
    else:
        raise ValueError(f"unknown policy {name!r}; expected one of "
                         f"{sorted(_POLICY_NAMES) + ['mv_lcb']}")
    return PolicyKind(
        tag=tag,
        mts_variance_estimator=block.get("mts_variance_estimator", "empirical"),
        lcb_width_scale=float(block.get("lcb_width_scale", 1.0)),
    )


def config_from_dict(spec: dict, base_dir: Path | None = None) -> ExperimentConfig:
    """Build a config from the JSON schema; unknown keys are errors."""
    unknown = set(spec) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    for required in ("instance", "policies", "horizon", "runs", "base_seed"):
        if required not in spec:
            raise ValueError(f"config is missing required key {required!r}")
    raw_instance = spec["instance"]
    if isinstance(raw_instance, str):
        path = Path(raw_instance)
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        instance = load_instance(path)
    elif isinstance(raw_instance, dict):
        instance = instance_from_dict(raw_instance)
    else:
        raise ValueError("instance must be an inline object or a file path")
    policies = tuple(_parse_policy(b, instance.family) for b in spec["policies"])
    out = spec.get("output_dir")
    return ExperimentConfig(
        instance=instance,
        policies=policies,
        horizon=int(spec["horizon"]),
        runs=int(spec["runs"]),
        base_seed=int(spec["base_seed"]),
        checkpoints=tuple(spec.get("checkpoints", ())),
        rho_grid=tuple(spec["rho_grid"]) if spec.get("rho_grid") is not None else None,
        output_dir=Path(out) if out else None,
    )


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    with open(path) as f:
        return config_from_dict(json.load(f), base_dir=path.parent)


@dataclass(frozen=True)
class CheckpointStats:
    checkpoint: int
    mean_regret: float
    stderr_regret: float
    mean_pseudo_regret: float
    mean_eq10_upper: float


@dataclass
class RegretSummary:
    """Aggregate over runs for one (policy, rho) cell."""

    policy: PolicyKind
    rho: float
    runs: int
    stats: tuple[CheckpointStats, ...]
    mean_pulls: np.ndarray
    per_run: list[RunResult] = field(default_factory=list, repr=False)

    @property
    def label(self) -> str:
        return _policy_name(self.policy.tag)

    def at(self, checkpoint: int) -> CheckpointStats:
        for s in self.stats:
            if s.checkpoint == checkpoint:
                return s
        raise KeyError(f"no checkpoint {checkpoint}")

    @property
    def final(self) -> CheckpointStats:
        return self.stats[-1]


def _one_run(
    config: ExperimentConfig,
    policy_idx: int,
    rho_idx: int,
    run: int,
    engine: str,
    keep_runs: bool,
) -> RunResult:
    kind = config.policies[policy_idx]
    instance = config.instance.with_rho(config.rhos[rho_idx])
    rng_p = derive_stream(config.base_seed, stream_key(policy_idx, rho_idx, run, ROLE_POLICY))
    rng_e = derive_stream(config.base_seed, stream_key(policy_idx, rho_idx, run, ROLE_ENV))
    return simulate_run(
        kind,
        instance,
        config.horizon,
        config.checkpoints,
        rng_p,
        rng_e,
        engine=engine,
        collect_trace=keep_runs,
    )


_WORKER_CTX: dict = {}


def _pool_init(config: ExperimentConfig, engine: str, keep_runs: bool) -> None:
    _WORKER_CTX["config"] = config
    _WORKER_CTX["engine"] = engine
    _WORKER_CTX["keep_runs"] = keep_runs


def _pool_task(task: tuple[int, int, int]) -> tuple[tuple[int, int, int], RunResult]:
    policy_idx, rho_idx, run = task
    result = _one_run(
        _WORKER_CTX["config"],
        policy_idx,
        rho_idx,
        run,
        _WORKER_CTX["engine"],
        _WORKER_CTX["keep_runs"],
    )
    return task, result


def resolve_workers(workers: int | None = None) -> int:
    """Worker count: explicit argument, else MVBANDIT_THREADS, else all CPUs."""
    if workers is None:
        env = os.environ.get("MVBANDIT_THREADS")
        workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, workers)


def run_experiment(
    config: ExperimentConfig,
    *,
    engine: str = "fast",
    workers: int | None = None,
    keep_runs: bool = False,
) -> list[RegretSummary]:
    """Simulate every (policy, rho, run) cell and aggregate across runs.

    Results are independent of worker count and scheduling order: each
    run's streams derive from its (policy, rho, run) ids and reduction
    happens in canonical order.
    """
    workers = resolve_workers(workers)
    tasks = [
        (p, r, i)
        for p in range(len(config.policies))
        for r in range(len(config.rhos))
        for i in range(config.runs)
    ]
    results: dict[tuple[int, int, int], RunResult] = {}
    if workers == 1 or len(tasks) == 1:
        for task in tasks:
            results[task] = _one_run(config, *task, engine, keep_runs)
    else:
        if engine == "fast":
            # Compile kernels before forking so workers inherit them.
            _one_run(config, 0, 0, 0, engine, False)
        with multiprocessing.Pool(
            processes=min(workers, len(tasks)),
            initializer=_pool_init,
            initargs=(config, engine, keep_runs),
        ) as pool:
            for task, result in pool.imap_unordered(_pool_task, tasks, chunksize=4):
                results[task] = result

    summaries = []
    ncp = len(config.checkpoints)
    for p, kind in enumerate(config.policies):
        for r, rho in enumerate(config.rhos):
            mean_r = np.zeros(ncp)
            m2_r = np.zeros(ncp)
            mean_p = np.zeros(ncp)
            mean_b = np.zeros(ncp)
            mean_pulls = np.zeros(config.instance.n_arms)
            per_run = []
            for i in range(config.runs):
                res = results[(p, r, i)]
                cnt = i + 1
                d = res.realized - mean_r
                mean_r += d / cnt
                m2_r += d * (res.realized - mean_r)
                mean_p += (res.pseudo - mean_p) / cnt
                mean_b += (res.bound - mean_b) / cnt
                mean_pulls += (res.pulls - mean_pulls) / cnt
                if keep_runs:
                    per_run.append(res)
            if config.runs > 1:
                stderr = np.sqrt(m2_r / (config.runs - 1)) / np.sqrt(config.runs)
            else:
                stderr = np.full(ncp, np.nan)
            stats = tuple(
                CheckpointStats(
                    checkpoint=int(config.checkpoints[c]),
                    mean_regret=float(mean_r[c]),
                    stderr_regret=float(stderr[c]),
                    mean_pseudo_regret=float(mean_p[c]),
                    mean_eq10_upper=float(mean_b[c]),
                )
                for c in range(ncp)
            )
            summaries.append(
                RegretSummary(
                    policy=kind,
                    rho=rho,
                    runs=config.runs,
                    stats=stats,
                    mean_pulls=mean_pulls,
                    per_run=per_run,
                )
            )
    return summaries


def sweep_rho(
    config: ExperimentConfig,
    *,
    engine: str = "fast",
    workers: int | None = None,
) -> list[RegretSummary]:
    """Run the experiment on a rho grid, keeping only the final checkpoint.

    Uses the config's grid when present, else the family default.
    """
    if config.rho_grid is None:
        config = ExperimentConfig(
            instance=config.instance,
            policies=config.policies,
            horizon=config.horizon,
            runs=config.runs,
            base_seed=config.base_seed,
            checkpoints=config.checkpoints,
            rho_grid=default_rho_grid(config.instance.family),
            output_dir=config.output_dir,
        )
    summaries = run_experiment(config, engine=engine, workers=workers)
    for s in summaries:
        s.stats = (s.stats[-1],)
    return summaries


def _fmt(x: float) -> str:
    return repr(float(x))


def write_outputs(
    summaries: list[RegretSummary],
    config: ExperimentConfig,
    out_dir: str | Path,
    *,
    dump_runs: bool = False,
    dump_posteriors: bool = False,
    wall_clock: float | None = None,
) -> list[Path]:
    """Write summary.csv, pulls.csv, and manifest.json (plus optional dumps).

    CSV floats use shortest round-trip decimals so identical configs give
    byte-identical files. Partial files are removed on failure.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        path = out_dir / "summary.csv"
        with open(path, "w") as f:
            f.write("policy,rho,checkpoint,mean_regret,stderr_regret,mean_pseudo_regret,mean_eq10_upper\n")
            for s in summaries:
                for st in s.stats:
                    f.write(
                        f"{s.label},{_fmt(s.rho)},{st.checkpoint},{_fmt(st.mean_regret)},"
                        f"{_fmt(st.stderr_regret)},{_fmt(st.mean_pseudo_regret)},{_fmt(st.mean_eq10_upper)}\n"
                    )
        written.append(path)

        path = out_dir / "pulls.csv"
        with open(path, "w") as f:
            f.write("policy,rho,arm,mean_pulls\n")
            for s in summaries:
                for arm, pulls in enumerate(s.mean_pulls):
                    f.write(f"{s.label},{_fmt(s.rho)},{arm},{_fmt(pulls)}\n")
        written.append(path)

        path = out_dir / "manifest.json"
        manifest = {
            "config": config.to_dict(),
            "version": __version__,
            "wall_clock_seconds": wall_clock,
            "written_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        }
        with open(path, "w") as f:
            json.dump(manifest, f, indent=2)
            f.write("\n")
        written.append(path)

        if dump_runs:
            path = out_dir / "runs.csv"
            with open(path, "w") as f:
                f.write("policy,rho,run,checkpoint,realized_regret,pseudo_regret,eq10_upper\n")
                for s in summaries:
                    for i, res in enumerate(s.per_run):
                        for c, cp in enumerate(res.checkpoints):
                            f.write(
                                f"{s.label},{_fmt(s.rho)},{i},{int(cp)},{_fmt(res.realized[c])},"
                                f"{_fmt(res.pseudo[c])},{_fmt(res.bound[c])}\n"
                            )
            written.append(path)

        if dump_posteriors:
            path = out_dir / "posteriors.json"
            dump = [
                {
                    "policy": s.label,
                    "rho": s.rho,
                    "run": i,
                    "posterior": {k: v.tolist() for k, v in res.posterior.items()},
                }
                for s in summaries
                for i, res in enumerate(s.per_run)
            ]
            with open(path, "w") as f:
                json.dump(dump, f)
                f.write("\n")
            written.append(path)
    except BaseException:
        for p in written:
            p.unlink(missing_ok=True)
        raise
    return written
