"""Analytic toolkit: Gamma tail bounds and asymptotic regret coefficients.

The per-policy coefficients multiply log(n) in the asymptotic upper bounds
on expected pseudo-regret. Degenerate gaps (equal means or equal
variances) yield infinite coefficients with a flag instead of an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .env import BanditInstance, gap_table
from .policies import PolicyKind, PolicyTag

__all__ = [
    "variance_ratio_kl",
    "gamma_tail_lower",
    "gamma_tail_upper",
    "BoundReport",
    "asymptotic_regret_coefficient",
]


def variance_ratio_kl(x: float) -> float:
    """KL divergence between zero-mean Gaussians with variance ratio ``x``.

    Equals (x - 1 - ln x) / 2: nonnegative, convex, zero only at x = 1. It
    is the rate at which posterior variance estimates discriminate between
    two variances with ratio x.
    """
    if x <= 0:
        raise ValueError(f"variance ratio must be positive, got {x}")
    return 0.5 * (x - 1.0 - math.log(x))


def gamma_tail_lower(alpha: float, beta: float, x: float) -> float:
    """Lower bound on P(X >= x) for X ~ Gamma(shape=alpha, rate=beta).

    Valid for alpha >= 2 (the Jensen step needs z -> z^(alpha-1) convex)
    and any x > 0: exp(-beta*x) * (1 + beta*x)^(alpha-1) / Gamma(alpha).
    Tight (an equality) at alpha = 2.
    """
    if alpha < 2:
        raise ValueError(f"lower bound requires shape >= 2, got {alpha}")
    if beta <= 0:
        raise ValueError(f"rate must be positive, got {beta}")
    if x <= 0:
        raise ValueError(f"x must be positive, got {x}")
    bx = beta * x
    return math.exp(-bx + (alpha - 1.0) * math.log1p(bx) - math.lgamma(alpha))


def gamma_tail_upper(alpha: float, beta: float, x: float) -> float:
    """Upper bound on P(X >= x) for X ~ Gamma(shape=alpha, rate=beta).

    Valid above the mean (x > alpha/beta): exp(-2*alpha*kl) with kl the
    variance-ratio KL at beta*x/alpha. Always <= 1 on its domain.
    """
    if alpha < 2:
        raise ValueError(f"upper bound requires shape >= 2, got {alpha}")
    if beta <= 0:
        raise ValueError(f"rate must be positive, got {beta}")
    if x <= alpha / beta:
        raise ValueError(f"upper bound valid only for x > mean = {alpha / beta}, got {x}")
    return math.exp(-2.0 * alpha * variance_ratio_kl(beta * x / alpha))


@dataclass(frozen=True)
class BoundReport:
    """Asymptotic log(n) regret coefficients for one policy on one instance.

    ``per_arm`` is aligned with the instance's arm order; the best arm's
    entry is 0. ``assumptions_ok[i]`` records whether the coefficient's
    hypotheses hold for arm i (always True for the best arm).
    ``total_coefficient`` sums the suboptimal entries; it is +inf when any
    gap needed by the formula degenerates (see ``warnings``).
    """

    policy: str
    best_arm: int
    per_arm: tuple[float, ...]
    total_coefficient: float
    assumptions_ok: tuple[bool, ...]
    warnings: tuple[str, ...] = ()
    # Limiting slopes as rho grows large (per unit rho*log n) or small
    # (per log n); only populated for the combined Gaussian policy.
    limit_rho_inf: float | None = None
    limit_rho_0: float | None = None

    def to_dict(self) -> dict:
        return {
            "policy": self.policy,
            "best_arm": self.best_arm,
            "per_arm": list(self.per_arm),
            "total_coefficient": self.total_coefficient,
            "assumptions_ok": list(self.assumptions_ok),
            "warnings": list(self.warnings),
            "limit_rho_inf": self.limit_rho_inf,
            "limit_rho_0": self.limit_rho_0,
        }


def _safe_div(num: float, den: float) -> float:
    return num / den if den > 0 else math.inf


def asymptotic_regret_coefficient(kind: PolicyKind, instance: BanditInstance) -> BoundReport:
    """Evaluate the per-arm and total log(n) coefficients for a policy."""
    gaps = gap_table(instance)
    tag = kind.tag
    if tag.is_gaussian() == (instance.family != "gaussian"):
        raise ValueError(f"policy {tag.value} does not apply to a {instance.family} instance")
    if tag in (PolicyTag.MV_LCB_GAUSSIAN, PolicyTag.MV_LCB_BERNOULLI):
        raise ValueError(f"no asymptotic coefficient is defined for {tag.value}")

    k = instance.n_arms
    best = gaps.best_arm
    rho = instance.rho
    mus = gaps.mus
    sigma2s = gaps.sigma2s
    mu1 = mus[best]
    sigma2_1 = sigma2s[best]
    weights = gaps.delta + 2.0 * gaps.gamma_max2

    per_arm = [0.0] * k
    ok = [True] * k
    warn: list[str] = []

    # Global hypothesis for the variance-learning policy: rho no larger
    # than the smallest positive delta/gamma ratio.
    vts_rho_ok = True
    if tag is PolicyTag.VTS:
        ratios = [
            gaps.delta[i] / (mu1 - mus[i])
            for i in range(k)
            if i != best and (mu1 - mus[i]) != 0 and gaps.delta[i] / (mu1 - mus[i]) > 0
        ]
        vts_rho_ok = bool(rho <= min(ratios)) if ratios else True

    for i in range(k):
        if i == best:
            continue
        gamma_1i = mu1 - mus[i]
        if tag is PolicyTag.MTS:
            den = (rho * gamma_1i - sigma2_1) ** 2
            per_arm[i] = float(_safe_div(2.0 * rho**2, den) * weights[i])
            ok[i] = bool(gamma_1i > 0 and rho > sigma2_1 / gamma_1i)
            if den == 0:
                warn.append(f"arm {i}: rho*gamma - sigma2_1 vanishes; coefficient infinite")
        elif tag is PolicyTag.VTS:
            kl = variance_ratio_kl(sigma2s[i] / sigma2_1)
            per_arm[i] = float(_safe_div(1.0, kl) * weights[i])
            ok[i] = bool(vts_rho_ok and gamma_1i * gamma_1i > 2.0 * sigma2_1 * kl)
            if kl == 0:
                warn.append(f"arm {i}: variance equals the best arm's; coefficient infinite")
        elif tag is PolicyTag.MVTS:
            kl = variance_ratio_kl(sigma2s[i] / sigma2_1)
            mean_term = _safe_div(2.0, gamma_1i**2)
            var_term = _safe_div(1.0, kl)
            per_arm[i] = float(max(mean_term, var_term) * weights[i])
            if not math.isfinite(per_arm[i]):
                warn.append(f"arm {i}: both mean and variance gaps degenerate; coefficient infinite")
        elif tag is PolicyTag.BMVTS:
            mirror = 1.0 - rho - mus[best] - mus[i]
            mean_term = _safe_div(1.0, 2.0 * gamma_1i**2)
            mirror_term = _safe_div(1.0, 2.0 * mirror**2)
            per_arm[i] = float(max(mean_term, mirror_term) * weights[i])
            ok[i] = 0.0 < rho < 1.0
            if not math.isfinite(per_arm[i]):
                warn.append(f"arm {i}: both success-probability gaps degenerate; coefficient infinite")
        else:  # pragma: no cover
            raise AssertionError(tag)

    total = float(sum(per_arm[i] for i in range(k) if i != best))
    limit_inf = limit_zero = None
    if tag is PolicyTag.MVTS:
        limit_inf = float(
            sum(_safe_div(2.0, mu1 - mus[i]) for i in range(k) if i != best)
        )
        limit_zero = float(
            sum(
                _safe_div(
                    sigma2s[i] - sigma2_1 + 2.0 * gaps.gamma_max2[i],
                    variance_ratio_kl(sigma2s[i] / sigma2_1),
                )
                for i in range(k)
                if i != best
            )
        )
    return BoundReport(
        policy=tag.value,
        best_arm=best,
        per_arm=tuple(per_arm),
        total_coefficient=total,
        assumptions_ok=tuple(ok),
        warnings=tuple(warn),
        limit_rho_inf=limit_inf,
        limit_rho_0=limit_zero,
    )
