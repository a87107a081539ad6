"""Built-in verification suites.

Re-runs the package's core identities against independent oracles:
posterior update identities, the Beta/Binomial CDF identity, the Gamma
tail sandwich, the trace variance decomposition, engine equivalence, and
the Monte Carlo domination of realized regret by pseudo-regret plus the
variance slack. Each check reports a measured margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from . import bounds
from .env import BanditInstance, BernoulliArm, GaussianArm, gap_table
from .policies import PolicyKind, PolicyTag
from .posterior import NormalGammaState, ng_update
from .regret import RegretAccumulator, RunTrace, pseudo_regret, pull_count_bound, realized_regret
from .rng import derive_stream
from .simulate import simulate_run

__all__ = ["CheckResult", "run_selfcheck"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    margin: str


def erlang_ccdf(alpha: int, beta: float, x: float) -> float:
    """Closed-form Gamma tail for integer shape: exp(-bx) * sum (bx)^k / k!."""
    bx = beta * x
    term = 1.0
    total = 1.0
    for k in range(1, alpha):
        term *= bx / k
        total += term
    return math.exp(-bx) * total


def gamma_ccdf_quad(alpha: float, beta: float, x: float) -> float:
    """Gamma tail via adaptive quadrature of the density (tolerance 1e-9)."""

    def density(t: float) -> float:
        return math.exp(alpha * math.log(beta) + (alpha - 1.0) * math.log(t) - beta * t - math.lgamma(alpha))

    val, _ = integrate.quad(density, x, np.inf, epsabs=1e-12, epsrel=1e-12)
    return val


def binomial_cdf(n: int, p: float, m: int) -> float:
    """P(Binomial(n, p) <= m) by direct summation with exact coefficients."""
    return sum(math.comb(n, k) * p**k * (1.0 - p) ** (n - k) for k in range(m + 1))


def _check_posterior_identities(n_vectors: int, rng: np.random.Generator) -> CheckResult:
    worst_mu = 0.0
    worst_beta = 0.0
    ok = True
    for _ in range(n_vectors):
        length = int(rng.integers(1, 201))
        xs = rng.normal(rng.uniform(-2, 2), rng.uniform(0.1, 2.0), size=length)
        state = NormalGammaState()
        for x in xs:
            state = ng_update(state, float(x))
        mean = float(np.mean(xs))
        ss = float(np.sum((xs - mean) ** 2))
        worst_mu = max(worst_mu, abs(state.mu_hat - mean))
        rel = abs((2.0 * state.beta - 1.0) - ss) / max(1.0, ss)
        worst_beta = max(worst_beta, rel)
        ok = ok and state.t_count == length and state.alpha == 0.5 + 0.5 * length
    ok = ok and worst_mu <= 1e-12 and worst_beta <= 1e-9
    return CheckResult(
        "posterior sequential-vs-batch identities",
        ok,
        f"max |mean err| = {worst_mu:.2e}, max rel sum-of-squares err = {worst_beta:.2e}",
    )


def _check_beta_binomial() -> CheckResult:
    worst = 0.0
    for a in range(1, 11):
        for b in range(1, 11):
            for y in np.linspace(0.1, 0.9, 9):
                lhs = float(special.betainc(a, b, y))
                rhs = 1.0 - binomial_cdf(a + b - 1, float(y), a - 1)
                worst = max(worst, abs(lhs - rhs))
    return CheckResult(
        "Beta/Binomial CDF identity", worst <= 1e-9, f"max abs deviation = {worst:.2e}"
    )


def _check_gamma_sandwich(quick: bool) -> CheckResult:
    alphas = np.arange(2.0, 10.5, 1.0 if quick else 0.5)
    betas = (0.5, 1.0, 2.0)
    min_lower_gap = math.inf
    min_upper_gap = math.inf
    max_eq_err = 0.0
    max_upper = 0.0
    ok = True
    for alpha in alphas:
        for beta in betas:
            mean = alpha / beta
            for x in mean * (1.0 + 0.25 * np.arange(1, 21)):
                if float(alpha).is_integer():
                    ccdf = erlang_ccdf(int(alpha), beta, float(x))
                else:
                    ccdf = gamma_ccdf_quad(float(alpha), beta, float(x))
                lo = bounds.gamma_tail_lower(float(alpha), beta, float(x))
                hi = bounds.gamma_tail_upper(float(alpha), beta, float(x))
                min_lower_gap = min(min_lower_gap, ccdf - lo)
                min_upper_gap = min(min_upper_gap, hi - ccdf)
                max_upper = max(max_upper, hi)
                if alpha == 2.0:
                    max_eq_err = max(max_eq_err, abs(lo - ccdf) / ccdf)
    tol = 1e-9
    ok = min_lower_gap >= -tol and min_upper_gap >= -tol and max_upper <= 1.0 + 1e-12 and max_eq_err <= 1e-12
    return CheckResult(
        "Gamma tail sandwich (lower <= exact <= upper <= 1)",
        ok,
        f"min(exact-lower) = {min_lower_gap:.2e}, min(upper-exact) = {min_upper_gap:.2e}, "
        f"shape-2 equality err = {max_eq_err:.2e}",
    )


def _check_kl_shape() -> CheckResult:
    xs = np.geomspace(0.05, 20.0, 41)
    vals = np.array([bounds.variance_ratio_kl(float(x)) for x in xs])
    at_one = bounds.variance_ratio_kl(1.0)
    positive = all(v > 0 for x, v in zip(xs, vals) if not math.isclose(x, 1.0))
    midpoint_convex = True
    for i in range(len(xs) - 2):
        mid = bounds.variance_ratio_kl(float((xs[i] + xs[i + 2]) / 2.0))
        if mid > (vals[i] + vals[i + 2]) / 2.0 + 1e-12:
            midpoint_convex = False
    ok = at_one == 0.0 and positive and midpoint_convex
    return CheckResult(
        "variance-ratio KL shape (zero at 1, positive, convex)",
        ok,
        f"value at 1 = {at_one:.1e}, positive elsewhere: {positive}, midpoint convex: {midpoint_convex}",
    )


def _random_trace(rng: np.random.Generator) -> RunTrace:
    k = int(rng.integers(2, 7))
    n = int(rng.integers(2, 41))
    arms = rng.integers(0, k, size=n)
    rewards = rng.normal(0.0, 1.0, size=n)
    return RunTrace.from_rounds(arms, rewards, k)


def _check_trace_identities(n_traces: int, rng: np.random.Generator) -> CheckResult:
    worst_decomp = 0.0
    worst_split = 0.0
    min_slack = math.inf
    for _ in range(n_traces):
        trace = _random_trace(rng)
        k = len(trace.pull_counts)
        instance = BanditInstance(
            tuple(GaussianArm(float(m), float(s)) for m, s in zip(rng.normal(0, 1, k), rng.uniform(0.1, 1.0, k))),
            rho=float(rng.uniform(0, 2)),
        )
        gaps = gap_table(instance)
        b = realized_regret(trace, gaps, instance.rho)
        # full-sequence variance vs pull-weighted within/between decomposition
        mean = float(np.mean(trace.rewards))
        var = float(np.mean((trace.rewards - mean) ** 2))
        within = between = 0.0
        for i in range(k):
            if trace.pull_counts[i]:
                xs = trace.rewards[trace.arms == i]
                m_i = float(np.mean(xs))
                within += trace.pull_counts[i] * float(np.mean((xs - m_i) ** 2))
                between += trace.pull_counts[i] * (m_i - mean) ** 2
        decomp = (within + between) / trace.n
        worst_decomp = max(worst_decomp, abs(var - decomp) / max(1.0, abs(var)))
        split = abs(b.realized_regret - (b.r1 + b.r2)) / max(1.0, abs(b.r1) + abs(b.r2))
        worst_split = max(worst_split, split)
        min_slack = min(min_slack, pull_count_bound(trace, gaps) - pseudo_regret(trace, gaps))
    ok = worst_decomp <= 1e-9 and worst_split <= 1e-9 and min_slack >= -1e-12
    return CheckResult(
        "trace identities (variance decomposition, regret split, pull-count bound)",
        ok,
        f"max decomposition err = {worst_decomp:.2e}, max split err = {worst_split:.2e}, "
        f"min bound slack = {min_slack:.2e}",
    )


def _check_engines_agree(quick: bool) -> CheckResult:
    gauss = BanditInstance((GaussianArm(0.5, 0.1), GaussianArm(0.3, 0.4), GaussianArm(0.6, 0.7)), rho=0.7)
    bern = BanditInstance((BernoulliArm(0.3), BernoulliArm(0.55), BernoulliArm(0.7)), rho=0.4)
    kinds = [
        (PolicyKind(PolicyTag.MTS), gauss),
        (PolicyKind(PolicyTag.VTS), gauss),
        (PolicyKind(PolicyTag.MVTS), gauss),
        (PolicyKind(PolicyTag.MV_LCB_GAUSSIAN), gauss),
        (PolicyKind(PolicyTag.BMVTS), bern),
        (PolicyKind(PolicyTag.MV_LCB_BERNOULLI), bern),
    ]
    n = 200 if quick else 600
    cps = (3, 10, n // 2, n)
    worst = 0.0
    identical = True
    for seed, (kind, instance) in enumerate(kinds):
        out = {}
        for engine in ("fast", "reference"):
            rng_p = derive_stream(90 + seed, (0,))
            rng_e = derive_stream(90 + seed, (1,))
            out[engine] = simulate_run(
                kind, instance, n, cps, rng_p, rng_e, engine=engine, collect_trace=True
            )
        a, b = out["fast"], out["reference"]
        identical = identical and np.array_equal(a.arms, b.arms) and np.array_equal(a.rewards, b.rewards)
        for fa, fb in ((a.realized, b.realized), (a.pseudo, b.pseudo), (a.bound, b.bound)):
            worst = max(worst, float(np.max(np.abs(fa - fb))))
    ok = identical and worst == 0.0
    return CheckResult(
        "fast kernels match the reference engine",
        ok,
        f"identical pull/reward sequences: {identical}, max checkpoint deviation = {worst:.2e}",
    )


def _check_regret_domination(quick: bool) -> CheckResult:
    runs = 200 if quick else 500
    n = 1000 if quick else 2000
    cases = [
        (PolicyKind(PolicyTag.MVTS), BanditInstance((GaussianArm(0.5, 0.1), GaussianArm(0.4, 0.3)), rho=0.5)),
        (PolicyKind(PolicyTag.BMVTS), BanditInstance((BernoulliArm(0.25), BernoulliArm(0.6), BernoulliArm(0.45)), rho=0.3)),
    ]
    margins = []
    ok = True
    for seed, (kind, instance) in enumerate(cases):
        gaps = gap_table(instance)
        realized = np.empty(runs)
        pseudo = np.empty(runs)
        for i in range(runs):
            rng_p = derive_stream(7000 + seed, (i, 0))
            rng_e = derive_stream(7000 + seed, (i, 1))
            res = simulate_run(kind, instance, n, (n,), rng_p, rng_e, gaps=gaps)
            realized[i] = res.realized[0]
            pseudo[i] = res.pseudo[0]
        slack = 3.0 * float(np.sum(instance.sigma2s))
        se = math.hypot(float(np.std(realized, ddof=1)), float(np.std(pseudo, ddof=1))) / math.sqrt(runs)
        margin = float(np.mean(pseudo)) + slack + 3.0 * se - float(np.mean(realized))
        margins.append(margin)
        ok = ok and margin >= 0.0
    return CheckResult(
        "mean realized regret within variance slack of mean pseudo-regret",
        ok,
        "margins = " + ", ".join(f"{m:.3f}" for m in margins),
    )


def run_selfcheck(quick: bool = False, echo=print) -> list[CheckResult]:
    """Run every check, printing one pass/fail line each; returns results."""
    rng = derive_stream(20240), derive_stream(20241)
    checks = [
        _check_posterior_identities(200 if quick else 1000, rng[0]),
        _check_beta_binomial(),
        _check_gamma_sandwich(quick),
        _check_kl_shape(),
        _check_trace_identities(500 if quick else 2000, rng[1]),
        _check_engines_agree(quick),
        _check_regret_domination(quick),
    ]
    for c in checks:
        echo(f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.margin}")
    return checks
