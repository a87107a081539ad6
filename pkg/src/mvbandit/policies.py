"""Arm-selection rules behind a uniform policy interface.

Four Thompson Sampling rules (mean-learning, variance-learning, combined,
and Bernoulli) plus optimistic index baselines for both families. All
policies are deterministic functions of (state, rng position); argmax ties
break toward the lowest index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .env import BanditInstance, sample_reward
from .posterior import BetaState, NormalGammaState, beta_update, ng_update

__all__ = ["PolicyTag", "PolicyKind", "PolicyState", "select_arm", "step"]


class PolicyTag(Enum):
    MTS = "mts"
    VTS = "vts"
    MVTS = "mvts"
    BMVTS = "bmvts"
    MV_LCB_GAUSSIAN = "mv_lcb_gaussian"
    MV_LCB_BERNOULLI = "mv_lcb_bernoulli"

    def is_gaussian(self) -> bool:
        return self in (PolicyTag.MTS, PolicyTag.VTS, PolicyTag.MVTS, PolicyTag.MV_LCB_GAUSSIAN)

    def is_thompson(self) -> bool:
        return self in (PolicyTag.MTS, PolicyTag.VTS, PolicyTag.MVTS, PolicyTag.BMVTS)

    @property
    def stable_id(self) -> int:
        """Small integer id used in seed-stream derivation; never reordered."""
        return _STABLE_IDS[self]


_STABLE_IDS = {
    PolicyTag.MTS: 0,
    PolicyTag.VTS: 1,
    PolicyTag.MVTS: 2,
    PolicyTag.BMVTS: 3,
    PolicyTag.MV_LCB_GAUSSIAN: 4,
    PolicyTag.MV_LCB_BERNOULLI: 5,
}

_VARIANCE_ESTIMATORS = ("empirical", "two_beta")


@dataclass(frozen=True)
class PolicyKind:
    """A policy tag plus its options.

    ``mts_variance_estimator`` selects the variance term of the
    mean-learning index: ``empirical`` plugs in the running population
    variance (2*beta - 1)/T, ``two_beta`` uses the unnormalized 2*beta,
    which grows linearly in T. ``lcb_width_scale`` multiplies the
    optimism width of the LCB baselines.
    """

    tag: PolicyTag
    mts_variance_estimator: str = "empirical"
    lcb_width_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.mts_variance_estimator not in _VARIANCE_ESTIMATORS:
            raise ValueError(
                f"mts_variance_estimator must be one of {_VARIANCE_ESTIMATORS}, "
                f"got {self.mts_variance_estimator!r}"
            )
        if not self.lcb_width_scale > 0:
            raise ValueError(f"lcb_width_scale must be positive, got {self.lcb_width_scale}")

    def check_family(self, instance: BanditInstance) -> None:
        if self.tag.is_gaussian() != (instance.family == "gaussian"):
            raise ValueError(
                f"policy {self.tag.value} does not apply to a {instance.family} instance"
            )


class PolicyState:
    """Per-run mutable state: per-arm posterior parameters and the round index.

    Owned by exactly one run. Gaussian policies keep Normal-Gamma arrays
    (the LCB baseline reads its empirical moments from them); Bernoulli
    policies keep Beta pseudo-counts.
    """

    def __init__(self, kind: PolicyKind, n_arms: int):
        self.kind = kind
        self.n_arms = int(n_arms)
        self.t = 1  # 1-based index of the next round to play
        if kind.tag.is_gaussian():
            self.mu_hat = np.zeros(n_arms)
            self.t_count = np.zeros(n_arms, dtype=np.int64)
            self.alpha = np.full(n_arms, 0.5)
            self.beta = np.full(n_arms, 0.5)
        else:
            self.alpha = np.ones(n_arms)
            self.beta = np.ones(n_arms)

    @property
    def pulls(self) -> np.ndarray:
        if self.kind.tag.is_gaussian():
            return self.t_count.copy()
        return (self.alpha + self.beta - 2.0).astype(np.int64)

    def posterior(self, arm: int) -> NormalGammaState | BetaState:
        """Materialize the posterior of one arm as a value object."""
        if self.kind.tag.is_gaussian():
            return NormalGammaState(
                mu_hat=float(self.mu_hat[arm]),
                t_count=int(self.t_count[arm]),
                alpha=float(self.alpha[arm]),
                beta=float(self.beta[arm]),
            )
        return BetaState(alpha=float(self.alpha[arm]), beta=float(self.beta[arm]))

    def observe(self, arm: int, reward: float) -> None:
        """Fold one observation into the pulled arm's posterior."""
        if self.kind.tag.is_gaussian():
            s = ng_update(self.posterior(arm), reward)
            self.mu_hat[arm] = s.mu_hat
            self.t_count[arm] = s.t_count
            self.alpha[arm] = s.alpha
            self.beta[arm] = s.beta
        else:
            s = beta_update(self.posterior(arm), reward)
            self.alpha[arm] = s.alpha
            self.beta[arm] = s.beta


def _lcb_indices(state: PolicyState, rho: float) -> np.ndarray:
    """Empirical risk-adjusted value plus optimism width; +inf when unpulled.

    The width is lcb_width_scale * (5 + rho) * sqrt(log(t^2) / (2 T_i)),
    computed as sqrt(log(t) / T_i); unpulled arms are forced.
    """
    scale = state.kind.lcb_width_scale * (5.0 + rho)
    log_t = math.log(state.t) if state.t > 1 else 0.0
    if state.kind.tag.is_gaussian():
        t = state.t_count
        with np.errstate(divide="ignore", invalid="ignore"):
            mv_hat = rho * state.mu_hat - (2.0 * state.beta - 1.0) / t
            idx = mv_hat + scale * np.sqrt(log_t / t)
    else:
        t = state.alpha + state.beta - 2.0
        with np.errstate(divide="ignore", invalid="ignore"):
            p_hat = (state.alpha - 1.0) / t
            idx = rho * p_hat - p_hat * (1.0 - p_hat) + scale * np.sqrt(log_t / t)
    return np.where(t == 0, np.inf, idx)


def select_arm(kind: PolicyKind, state: PolicyState, rho: float, rng: np.random.Generator) -> int:
    """Select an arm by the policy's per-arm index; ties break low.

    Thompson policies consume exactly one draw per arm per sampler.
    Gaussian Thompson policies require every arm to have been pulled once.
    """
    tag = kind.tag
    k = state.n_arms
    if tag is PolicyTag.MTS:
        _require_initialized(state)
        theta = state.mu_hat + rng.standard_normal(k) / np.sqrt(state.t_count)
        if kind.mts_variance_estimator == "empirical":
            v_hat = (2.0 * state.beta - 1.0) / state.t_count
        else:
            v_hat = 2.0 * state.beta
        idx = rho * theta - v_hat
    elif tag is PolicyTag.VTS:
        _require_initialized(state)
        tau = rng.standard_gamma(state.alpha) / state.beta
        idx = rho * state.mu_hat - 1.0 / tau
    elif tag is PolicyTag.MVTS:
        _require_initialized(state)
        tau = rng.standard_gamma(state.alpha) / state.beta
        theta = state.mu_hat + rng.standard_normal(k) / np.sqrt(state.t_count)
        idx = rho * theta - 1.0 / tau
    elif tag is PolicyTag.BMVTS:
        theta = rng.beta(state.alpha, state.beta)
        idx = rho * theta - theta * (1.0 - theta)
    elif tag in (PolicyTag.MV_LCB_GAUSSIAN, PolicyTag.MV_LCB_BERNOULLI):
        idx = _lcb_indices(state, rho)
    else:  # pragma: no cover
        raise AssertionError(tag)
    return int(np.argmax(idx))


def _require_initialized(state: PolicyState) -> None:
    if np.any(state.t_count == 0):
        raise ValueError("Gaussian Thompson policies need one pull of every arm first")


def step(
    kind: PolicyKind,
    state: PolicyState,
    instance: BanditInstance,
    rng_policy: np.random.Generator,
    rng_env: np.random.Generator,
) -> tuple[int, float, PolicyState]:
    """Play one round: choose an arm, draw its reward, update the posterior.

    Gaussian Thompson policies play round-robin for the first K rounds.
    The state is updated in place and returned.
    """
    kind.check_family(instance)
    if kind.tag.is_thompson() and kind.tag.is_gaussian() and state.t <= state.n_arms:
        arm = state.t - 1
    else:
        arm = select_arm(kind, state, instance.rho, rng_policy)
    reward = sample_reward(instance, arm, rng_env)
    state.observe(arm, reward)
    state.t += 1
    return arm, reward, state
