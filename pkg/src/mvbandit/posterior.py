"""Conjugate posterior state for the two arm families.

Gaussian arms with unknown mean and precision use a Normal-Gamma posterior
with fixed prior (mu_hat=0, T=0, alpha=1/2, beta=1/2); Bernoulli arms use a
Beta(1, 1) prior. States are plain immutable values; updates return new
states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "NormalGammaState",
    "BetaState",
    "ng_update",
    "ng_sample_mean",
    "ng_sample_precision",
    "beta_update",
    "beta_sample",
]


@dataclass(frozen=True)
class NormalGammaState:
    """Normal-Gamma posterior parameters for one Gaussian arm.

    ``mu_hat`` is the running sample mean of the arm's rewards, ``t_count``
    the number of observations, and (``alpha``, ``beta``) the Gamma
    parameters of the precision. 2*beta - 1 equals the running sum of
    squared deviations of the observations from their mean.
    """

    mu_hat: float = 0.0
    t_count: int = 0
    alpha: float = 0.5
    beta: float = 0.5

    def __post_init__(self) -> None:
        if self.t_count < 0:
            raise ValueError(f"t_count must be >= 0, got {self.t_count}")
        if self.alpha != 0.5 + 0.5 * self.t_count:
            raise ValueError(
                f"alpha must equal 1/2 + t_count/2 (got alpha={self.alpha}, t_count={self.t_count})"
            )
        if self.beta < 0.5:
            raise ValueError(f"beta must be >= 1/2, got {self.beta}")

    @property
    def empirical_variance(self) -> float:
        """Population variance of the observations, (2*beta - 1) / t_count."""
        if self.t_count == 0:
            raise ValueError("empirical variance undefined with no observations")
        return (2.0 * self.beta - 1.0) / self.t_count


def ng_update(state: NormalGammaState, x: float) -> NormalGammaState:
    """Fold one observation into a Normal-Gamma state.

    Mean and count move to the posterior values; alpha gains 1/2 and beta
    gains half the Welford sum-of-squares increment, so 2*beta - 1 stays
    the running sum of squared deviations.
    """
    t = state.t_count
    mu = (t * state.mu_hat + x) / (t + 1)
    d = x - state.mu_hat
    beta = state.beta + (t / (t + 1)) * (d * d) / 2.0
    return NormalGammaState(mu_hat=mu, t_count=t + 1, alpha=state.alpha + 0.5, beta=beta)


def ng_sample_mean(state: NormalGammaState, rng: np.random.Generator) -> float:
    """One draw of the mean: Normal(mu_hat, 1/t_count)."""
    if state.t_count < 1:
        raise ValueError("cannot sample the mean before the first observation")
    return float(state.mu_hat + rng.standard_normal() / math.sqrt(state.t_count))


def ng_sample_precision(state: NormalGammaState, rng: np.random.Generator) -> float:
    """One draw of the precision: Gamma(shape=alpha, rate=beta)."""
    if state.alpha <= 0 or state.beta <= 0:
        raise ValueError(f"alpha and beta must be positive, got ({state.alpha}, {state.beta})")
    return float(rng.standard_gamma(state.alpha) / state.beta)


@dataclass(frozen=True)
class BetaState:
    """Beta posterior pseudo-counts for one Bernoulli arm."""

    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self) -> None:
        if self.alpha < 1 or self.beta < 1:
            raise ValueError(f"pseudo-counts must be >= 1, got ({self.alpha}, {self.beta})")

    @property
    def pulls(self) -> float:
        return self.alpha + self.beta - 2.0


def beta_update(state: BetaState, x: float) -> BetaState:
    """Fold one {0,1} reward into a Beta state."""
    if x not in (0, 1):
        raise ValueError(f"reward must be 0 or 1, got {x}")
    return BetaState(alpha=state.alpha + x, beta=state.beta + (1 - x))


def beta_sample(state: BetaState, rng: np.random.Generator) -> float:
    """One draw from Beta(alpha, beta), in (0, 1)."""
    if state.alpha <= 0 or state.beta <= 0:
        raise ValueError(f"alpha and beta must be positive, got ({state.alpha}, {state.beta})")
    return float(rng.beta(state.alpha, state.beta))
