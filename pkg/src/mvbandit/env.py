"""Bandit instances: arm families, reward generation, and ground-truth gaps."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np

__all__ = [
    "GaussianArm",
    "BernoulliArm",
    "BanditInstance",
    "GapTable",
    "mean_variance",
    "gap_table",
    "sample_reward",
    "load_instance",
    "instance_to_dict",
    "bundled_instance_path",
]


@dataclass(frozen=True)
class GaussianArm:
    """Arm with normally distributed rewards."""

    mu: float
    sigma2: float

    def __post_init__(self) -> None:
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")


@dataclass(frozen=True)
class BernoulliArm:
    """Arm with {0,1} rewards and success probability ``p``.

    The variance p*(1-p) is always derived, never stored.
    """

    p: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must be in [0, 1], got {self.p}")

    @property
    def mu(self) -> float:
        return self.p

    @property
    def sigma2(self) -> float:
        return self.p * (1.0 - self.p)


Arm = Union[GaussianArm, BernoulliArm]


@dataclass(frozen=True)
class BanditInstance:
    """A homogeneous family of arms together with the risk tolerance rho.

    Immutable after construction; safe to share across threads.
    """

    arms: tuple[Arm, ...]
    rho: float

    def __post_init__(self) -> None:
        if len(self.arms) < 2:
            raise ValueError("an instance needs at least 2 arms")
        if self.rho < 0:
            raise ValueError(f"rho must be >= 0, got {self.rho}")
        kinds = {type(a) for a in self.arms}
        if len(kinds) != 1:
            raise ValueError("arm family must be homogeneous (all Gaussian or all Bernoulli)")
        object.__setattr__(self, "arms", tuple(self.arms))

    @property
    def family(self) -> str:
        return "gaussian" if isinstance(self.arms[0], GaussianArm) else "bernoulli"

    @property
    def n_arms(self) -> int:
        return len(self.arms)

    @property
    def mus(self) -> np.ndarray:
        return np.array([a.mu for a in self.arms], dtype=float)

    @property
    def sigma2s(self) -> np.ndarray:
        return np.array([a.sigma2 for a in self.arms], dtype=float)

    def with_rho(self, rho: float) -> "BanditInstance":
        return BanditInstance(self.arms, float(rho))


def mean_variance(mu: float, sigma2: float, rho: float) -> float:
    """Risk-adjusted value rho*mu - sigma2 of an arm; larger is better."""
    if sigma2 < 0:
        raise ValueError(f"sigma2 must be >= 0, got {sigma2}")
    return rho * mu - sigma2


@dataclass(frozen=True)
class GapTable:
    """Ground-truth per-arm values and gaps for one (instance, rho).

    ``delta[i]`` is the shortfall of arm i's risk-adjusted value below the
    best arm's; ``gamma[i, j]`` is the difference of means mu_i - mu_j and
    ``gamma_max2[i]`` its worst square over j.
    """

    mv: np.ndarray
    best_arm: int
    delta: np.ndarray
    gamma: np.ndarray
    gamma_max2: np.ndarray
    mus: np.ndarray = field(repr=False)
    sigma2s: np.ndarray = field(repr=False)


def gap_table(instance: BanditInstance) -> GapTable:
    """Compute risk-adjusted values, the best arm, and all gaps.

    Ties for the best arm break toward the lowest index.
    """
    mus = instance.mus
    sigma2s = instance.sigma2s
    mv = instance.rho * mus - sigma2s
    best = int(np.argmax(mv))
    delta = mv[best] - mv
    gamma = mus[:, None] - mus[None, :]
    gamma_max2 = np.max(gamma**2, axis=1)
    for arr in (mv, delta, gamma, gamma_max2, mus, sigma2s):
        arr.setflags(write=False)
    return GapTable(
        mv=mv,
        best_arm=best,
        delta=delta,
        gamma=gamma,
        gamma_max2=gamma_max2,
        mus=mus,
        sigma2s=sigma2s,
    )


def sample_reward(instance: BanditInstance, arm: int, rng: np.random.Generator) -> float:
    """Draw one reward from the given arm, consuming one logical draw."""
    if not 0 <= arm < instance.n_arms:
        raise IndexError(f"arm index {arm} out of range [0, {instance.n_arms})")
    a = instance.arms[arm]
    if isinstance(a, GaussianArm):
        return float(rng.normal(a.mu, np.sqrt(a.sigma2)))
    return 1.0 if rng.random() < a.p else 0.0


# ---------------------------------------------------------------------------
# Instance definition files
# ---------------------------------------------------------------------------

_GAUSSIAN_KEYS = {"family", "mu", "sigma2", "rho"}
_BERNOULLI_KEYS = {"family", "p", "rho"}


def instance_from_dict(spec: dict) -> BanditInstance:
    """Build an instance from the JSON schema; unknown keys are errors."""
    family = spec.get("family")
    if family == "gaussian":
        unknown = set(spec) - _GAUSSIAN_KEYS
        if unknown:
            raise ValueError(f"unknown instance keys: {sorted(unknown)}")
        mu, sigma2 = spec.get("mu"), spec.get("sigma2")
        if mu is None or sigma2 is None:
            raise ValueError("gaussian instance requires 'mu' and 'sigma2'")
        if len(mu) != len(sigma2):
            raise ValueError(f"mu has {len(mu)} entries but sigma2 has {len(sigma2)}")
        arms = tuple(GaussianArm(float(m), float(s)) for m, s in zip(mu, sigma2))
    elif family == "bernoulli":
        unknown = set(spec) - _BERNOULLI_KEYS
        if unknown:
            raise ValueError(f"unknown instance keys: {sorted(unknown)}")
        p = spec.get("p")
        if p is None:
            raise ValueError("bernoulli instance requires 'p'")
        arms = tuple(BernoulliArm(float(q)) for q in p)
    else:
        raise ValueError(f"family must be 'gaussian' or 'bernoulli', got {family!r}")
    if "rho" not in spec:
        raise ValueError("instance requires 'rho'")
    instance = BanditInstance(arms, float(spec["rho"]))
    _warn_large_variance(instance)
    return instance


def instance_to_dict(instance: BanditInstance) -> dict:
    if instance.family == "gaussian":
        return {
            "family": "gaussian",
            "mu": [a.mu for a in instance.arms],
            "sigma2": [a.sigma2 for a in instance.arms],
            "rho": instance.rho,
        }
    return {"family": "bernoulli", "p": [a.p for a in instance.arms], "rho": instance.rho}


def load_instance(path: str | Path) -> BanditInstance:
    with open(path) as f:
        return instance_from_dict(json.load(f))


def _warn_large_variance(instance: BanditInstance) -> None:
    # The asymptotic coefficients presume variances <= 1; larger values are
    # legal (only variance ratios matter after rescaling) but worth flagging.
    if instance.family == "gaussian":
        worst = float(np.max(instance.sigma2s))
        if worst > 1.0:
            warnings.warn(
                f"instance has arm variance {worst} > 1; asymptotic bound "
                "constants presume variances <= 1 (rescale to compare)",
                stacklevel=3,
            )


def bundled_instance_path(name: str) -> Path:
    """Path of a bundled instance file, e.g. 'gaussian15' or 'bernoulli15'."""
    path = Path(__file__).parent / "data" / f"{name}.json"
    if not path.exists():
        raise FileNotFoundError(f"no bundled instance named {name!r}")
    return path


def benchmark_gaussian15(rho: float = 1.0) -> BanditInstance:
    """The bundled 15-arm Gaussian benchmark at the given risk tolerance."""
    return load_instance(bundled_instance_path("gaussian15")).with_rho(rho)


def benchmark_bernoulli15(rho: float = 0.5) -> BanditInstance:
    """The bundled 15-arm Bernoulli benchmark at the given risk tolerance."""
    return load_instance(bundled_instance_path("bernoulli15")).with_rho(rho)
