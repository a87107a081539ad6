"""Per-trace regret accounting.

Realized regret compares the trace's empirical risk-adjusted value against
always playing the best arm; pseudo-regret charges each pull its
ground-truth gap plus a pairwise switching term. A streaming accumulator
produces the same statistics at a grid of checkpoints in O(K) memory.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .env import GapTable

__all__ = [
    "RunTrace",
    "RegretBreakdown",
    "empirical_mv",
    "realized_regret",
    "pseudo_regret",
    "pull_count_bound",
    "RegretAccumulator",
]


@dataclass(frozen=True)
class RunTrace:
    """Record of one run: arm pulled and reward observed per round."""

    arms: np.ndarray
    rewards: np.ndarray
    pull_counts: np.ndarray

    def __post_init__(self) -> None:
        arms = np.asarray(self.arms, dtype=np.int64)
        rewards = np.asarray(self.rewards, dtype=float)
        pulls = np.asarray(self.pull_counts, dtype=np.int64)
        if arms.shape != rewards.shape or arms.ndim != 1:
            raise ValueError("arms and rewards must be 1-d sequences of equal length")
        recomputed = np.bincount(arms, minlength=len(pulls))
        if len(recomputed) != len(pulls) or not np.array_equal(recomputed, pulls):
            raise ValueError("pull_counts do not match the arm sequence")
        object.__setattr__(self, "arms", arms)
        object.__setattr__(self, "rewards", rewards)
        object.__setattr__(self, "pull_counts", pulls)

    @classmethod
    def from_rounds(cls, arms, rewards, n_arms: int) -> "RunTrace":
        arms = np.asarray(arms, dtype=np.int64)
        return cls(arms, np.asarray(rewards, dtype=float), np.bincount(arms, minlength=n_arms))

    @property
    def n(self) -> int:
        return len(self.arms)


@dataclass(frozen=True)
class RegretBreakdown:
    """Realized regret of one trace and its exact decomposition.

    ``r1`` collects the per-arm mean and variance shortfalls, ``r2`` the
    nonnegative between-arm dispersion; their sum reproduces
    ``realized_regret`` up to floating-point reassociation. The pseudo
    terms depend only on pull counts and ground-truth gaps.
    """

    realized_regret: float
    r1: float
    r2: float
    pseudo_first: float
    pseudo_cross: float

    @property
    def pseudo_regret(self) -> float:
        return self.pseudo_first + self.pseudo_cross


def empirical_mv(rewards, rho: float) -> float:
    """rho * mean - population variance of a reward sequence."""
    rewards = np.asarray(rewards, dtype=float)
    if rewards.size == 0:
        raise ValueError("empirical mean-variance undefined for an empty sequence")
    mean = float(np.mean(rewards))
    var = float(np.mean((rewards - mean) ** 2))
    return rho * mean - var


def _per_arm_moments(trace: RunTrace) -> tuple[np.ndarray, np.ndarray]:
    """Per-arm sample mean and population variance; zeros where never pulled."""
    k = len(trace.pull_counts)
    means = np.zeros(k)
    variances = np.zeros(k)
    for i in range(k):
        if trace.pull_counts[i] > 0:
            xs = trace.rewards[trace.arms == i]
            means[i] = np.mean(xs)
            variances[i] = np.mean((xs - means[i]) ** 2)
    return means, variances


def realized_regret(trace: RunTrace, gaps: GapTable, rho: float) -> RegretBreakdown:
    """Realized regret of a trace with its decomposition and pseudo terms.

    Arms never pulled contribute zero to every per-arm sum. Single-trace
    regret may be negative; no clamping.
    """
    if len(trace.pull_counts) != len(gaps.mv):
        raise ValueError("trace and gap table disagree on the number of arms")
    n = trace.n
    mv_best = float(gaps.mv[gaps.best_arm])
    realized = n * (mv_best - empirical_mv(trace.rewards, rho))

    mu1 = float(gaps.mus[gaps.best_arm])
    sigma2_1 = float(gaps.sigma2s[gaps.best_arm])
    t = trace.pull_counts.astype(float)
    means, variances = _per_arm_moments(trace)
    grand_mean = float(np.mean(trace.rewards))
    r1 = float(np.sum(rho * t * (mu1 - means) + t * (variances - sigma2_1)))
    r2 = float(np.sum(t * (means - grand_mean) ** 2))

    pseudo_first = float(t @ gaps.delta)
    cross = t[:, None] * t[None, :] * gaps.gamma**2
    pseudo_cross = float((np.sum(cross) - np.trace(cross)) / n)
    return RegretBreakdown(
        realized_regret=realized,
        r1=r1,
        r2=r2,
        pseudo_first=pseudo_first,
        pseudo_cross=pseudo_cross,
    )


def pseudo_regret(trace: RunTrace, gaps: GapTable) -> float:
    """Gap-weighted pull counts plus the pairwise switching term."""
    b = realized_regret(trace, gaps, rho=0.0)
    return b.pseudo_regret


def pull_count_bound(trace: RunTrace, gaps: GapTable) -> float:
    """Per-run upper bound on pseudo-regret from suboptimal pull counts.

    Sums T_i * (delta_i + 2 * gamma_max2_i) over arms other than the best;
    dominates ``pseudo_regret`` for every trace.
    """
    t = trace.pull_counts.astype(float)
    weights = gaps.delta + 2.0 * gaps.gamma_max2
    mask = np.arange(len(t)) != gaps.best_arm
    return float(np.sum(t[mask] * weights[mask]))


class RegretAccumulator:
    """Streaming regret statistics over one run.

    Maintains per-arm and global Welford accumulators so regret at any
    checkpoint is available without re-scanning the trace. The checkpoint
    arithmetic mirrors the fast simulation kernels exactly.
    """

    def __init__(self, gaps: GapTable, rho: float):
        self.gaps = gaps
        self.rho = float(rho)
        self.gamma2 = np.square(gaps.gamma)
        k = len(gaps.mv)
        self.t = 0
        self.pulls = np.zeros(k, dtype=np.int64)
        self.arm_mean = np.zeros(k)
        self.arm_m2 = np.zeros(k)
        self.global_mean = 0.0
        self.global_m2 = 0.0

    def update(self, arm: int, reward: float) -> None:
        self.t += 1
        self.pulls[arm] += 1
        d = reward - self.arm_mean[arm]
        self.arm_mean[arm] += d / self.pulls[arm]
        self.arm_m2[arm] += d * (reward - self.arm_mean[arm])
        d = reward - self.global_mean
        self.global_mean += d / self.t
        self.global_m2 += d * (reward - self.global_mean)

    def realized(self) -> float:
        mv_best = float(self.gaps.mv[self.gaps.best_arm])
        mv_hat = self.rho * self.global_mean - self.global_m2 / self.t
        return self.t * (mv_best - mv_hat)

    def pseudo(self) -> float:
        k = len(self.pulls)
        first = 0.0
        cross = 0.0
        for i in range(k):
            ti = float(self.pulls[i])
            first += ti * self.gaps.delta[i]
            for j in range(k):
                if j != i:
                    cross += ti * float(self.pulls[j]) * self.gamma2[i, j]
        return first + cross / self.t

    def bound(self) -> float:
        total = 0.0
        for i in range(len(self.pulls)):
            if i != self.gaps.best_arm:
                total += float(self.pulls[i]) * (self.gaps.delta[i] + 2.0 * self.gaps.gamma_max2[i])
        return total

    def snapshot(self) -> tuple[float, float, float]:
        """(realized, pseudo, bound) at the current round."""
        return self.realized(), self.pseudo(), self.bound()
