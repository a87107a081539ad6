"""Render regret figures from harness summary CSVs.

Input schema (one row per policy/rho/checkpoint):
    policy,rho,checkpoint,mean_regret,stderr_regret,mean_pseudo_regret,mean_eq10_upper

Two figure kinds: regret against the round index for one rho, and
regret at the final round against rho. Each policy gets one line with a
shaded band of two standard errors. Output is deterministic: identical
input produces identical image bytes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

__all__ = ["FigureSpec", "RenderError", "render"]

REQUIRED_COLUMNS = (
    "policy",
    "rho",
    "checkpoint",
    "mean_regret",
    "stderr_regret",
    "mean_pseudo_regret",
    "mean_eq10_upper",
)

KINDS = ("regret_vs_n", "regret_vs_rho")


class RenderError(ValueError):
    """Bad figure request: unknown kind, missing columns, or empty selection."""


@dataclass(frozen=True)
class FigureSpec:
    """One figure request."""

    kind: str
    csv_path: Path
    out_path: Path
    rho: float | None = None
    policies: tuple[str, ...] = ()
    log_x: bool | None = None  # default: log for rho sweeps, linear otherwise

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise RenderError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind == "regret_vs_n" and self.rho is None:
            raise RenderError("regret_vs_n needs a rho filter")
        object.__setattr__(self, "csv_path", Path(self.csv_path))
        object.__setattr__(self, "out_path", Path(self.out_path))


def read_summary(path: Path) -> list[dict]:
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        header = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise RenderError(f"{path}: missing columns {missing}")
        rows = []
        for raw in reader:
            rows.append(
                {
                    "policy": raw["policy"],
                    "rho": float(raw["rho"]),
                    "checkpoint": int(raw["checkpoint"]),
                    "mean_regret": float(raw["mean_regret"]),
                    "stderr_regret": float(raw["stderr_regret"]),
                }
            )
    return rows


def _series(spec: FigureSpec, rows: list[dict]) -> dict[str, tuple[list[float], list[float], list[float]]]:
    if spec.policies:
        rows = [r for r in rows if r["policy"] in spec.policies]
    if spec.kind == "regret_vs_n":
        rows = [r for r in rows if math.isclose(r["rho"], spec.rho, rel_tol=1e-9, abs_tol=0.0)]
        key = "checkpoint"
    else:
        last = {}
        for r in rows:
            cur = last.get((r["policy"], r["rho"]))
            if cur is None or r["checkpoint"] > cur["checkpoint"]:
                last[(r["policy"], r["rho"])] = r
        rows = list(last.values())
        key = "rho"
    if not rows:
        raise RenderError("no rows after filter")
    series: dict[str, tuple[list, list, list]] = {}
    for policy in sorted({r["policy"] for r in rows}):
        mine = sorted((r for r in rows if r["policy"] == policy), key=lambda r: r[key])
        series[policy] = (
            [r[key] for r in mine],
            [r["mean_regret"] for r in mine],
            [r["stderr_regret"] for r in mine],
        )
    return series


def render(spec: FigureSpec) -> tuple[list[Path], list[str]]:
    """Render one figure as PNG and SVG; returns (paths, legend labels)."""
    series = _series(spec, read_summary(spec.csv_path))

    plt.rcParams["svg.hashsalt"] = "mvbandit-plots"
    plt.rcParams["svg.fonttype"] = "none"
    fig, ax = plt.subplots(figsize=(6.4, 4.2), dpi=120)
    for policy, (xs, ys, ses) in series.items():
        (line,) = ax.plot(xs, ys, marker="o", markersize=3, linewidth=1.4, label=policy)
        lo = [y - 2 * s for y, s in zip(ys, ses)]
        hi = [y + 2 * s for y, s in zip(ys, ses)]
        ax.fill_between(xs, lo, hi, alpha=0.2, color=line.get_color(), linewidth=0)
    if spec.kind == "regret_vs_n":
        ax.set_xlabel("round $n$")
        ax.set_title(f"mean regret, rho = {spec.rho:g}")
        log_x = bool(spec.log_x)
    else:
        ax.set_xlabel("risk tolerance rho")
        ax.set_title("mean regret at the final round")
        log_x = True if spec.log_x is None else spec.log_x
    if log_x:
        ax.set_xscale("log")
    ax.set_ylabel("mean realized regret")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()

    spec.out_path.parent.mkdir(parents=True, exist_ok=True)
    paths = [spec.out_path.with_suffix(".png"), spec.out_path.with_suffix(".svg")]
    fig.savefig(paths[0])
    fig.savefig(paths[1], metadata={"Date": None})
    plt.close(fig)
    return paths, list(series)
