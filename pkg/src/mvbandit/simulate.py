"""Single-run simulation drivers.

Two engines produce bit-identical results: a readable reference loop built
on ``policies.step`` plus the streaming ``RegretAccumulator``, and compiled
kernels used by the experiment harness. The kernels replicate the
reference arithmetic operation for operation (same draw order, same
floating-point expression shapes); the test suite pins the two engines to
exact equality.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .env import BanditInstance, GapTable, gap_table
from .policies import PolicyKind, PolicyState, PolicyTag, step
from .regret import RegretAccumulator

__all__ = ["RunResult", "simulate_run"]

# Kernel policy codes. Gaussian: 0..3; Bernoulli: 0..1.
_GAUSS_CODES = {PolicyTag.MTS: 0, PolicyTag.VTS: 1, PolicyTag.MVTS: 2, PolicyTag.MV_LCB_GAUSSIAN: 3}
_BERN_CODES = {PolicyTag.BMVTS: 0, PolicyTag.MV_LCB_BERNOULLI: 1}


@dataclass
class RunResult:
    """Checkpointed regret statistics and final state of one run."""

    checkpoints: np.ndarray
    realized: np.ndarray
    pseudo: np.ndarray
    bound: np.ndarray
    pulls: np.ndarray
    posterior: dict[str, np.ndarray]
    arms: np.ndarray | None = None
    rewards: np.ndarray | None = None


@njit(cache=True)
def _run_gaussian(
    code,
    two_beta,
    lcb_scale,
    mu,
    sd,
    rho,
    n,
    cps,
    mv_best,
    delta,
    gamma2,
    gamma_max2,
    best,
    rng_p,
    rng_e,
    want_trace,
):
    k = mu.shape[0]
    mu_hat = np.zeros(k)
    t_cnt = np.zeros(k)
    alpha = np.full(k, 0.5)
    beta = np.full(k, 0.5)

    pulls = np.zeros(k, dtype=np.int64)
    arm_mean = np.zeros(k)
    arm_m2 = np.zeros(k)
    g_mean = 0.0
    g_m2 = 0.0

    ncp = cps.shape[0]
    out_r = np.empty(ncp)
    out_p = np.empty(ncp)
    out_b = np.empty(ncp)
    trace_n = n if want_trace else 0
    arms = np.empty(trace_n, dtype=np.int64)
    rewards = np.empty(trace_n)

    tau = np.empty(k)
    ci = 0
    for t in range(1, n + 1):
        if code <= 2 and t <= k:
            a = t - 1
        else:
            a = 0
            bv = -np.inf
            if code == 0:  # mean-learning TS
                for i in range(k):
                    theta = mu_hat[i] + rng_p.standard_normal() / np.sqrt(t_cnt[i])
                    if two_beta:
                        v_hat = 2.0 * beta[i]
                    else:
                        v_hat = (2.0 * beta[i] - 1.0) / t_cnt[i]
                    val = rho * theta - v_hat
                    if val > bv:
                        bv = val
                        a = i
            elif code == 1:  # variance-learning TS
                for i in range(k):
                    tau_i = rng_p.standard_gamma(alpha[i]) / beta[i]
                    val = rho * mu_hat[i] - 1.0 / tau_i
                    if val > bv:
                        bv = val
                        a = i
            elif code == 2:  # combined TS: all precisions first, then means
                for i in range(k):
                    tau[i] = rng_p.standard_gamma(alpha[i]) / beta[i]
                for i in range(k):
                    theta = mu_hat[i] + rng_p.standard_normal() / np.sqrt(t_cnt[i])
                    val = rho * theta - 1.0 / tau[i]
                    if val > bv:
                        bv = val
                        a = i
            else:  # optimistic empirical index
                log_t = np.log(float(t))
                for i in range(k):
                    if t_cnt[i] == 0:
                        val = np.inf
                    else:
                        mv_hat = rho * mu_hat[i] - (2.0 * beta[i] - 1.0) / t_cnt[i]
                        val = mv_hat + lcb_scale * np.sqrt(log_t / t_cnt[i])
                    if val > bv:
                        bv = val
                        a = i

        x = rng_e.normal(mu[a], sd[a])

        tc = t_cnt[a]
        m_old = mu_hat[a]
        mu_hat[a] = (tc * m_old + x) / (tc + 1)
        d = x - m_old
        beta[a] = beta[a] + (tc / (tc + 1)) * (d * d) / 2.0
        alpha[a] = alpha[a] + 0.5
        t_cnt[a] = tc + 1.0

        pulls[a] += 1
        d = x - arm_mean[a]
        arm_mean[a] += d / pulls[a]
        arm_m2[a] += d * (x - arm_mean[a])
        d = x - g_mean
        g_mean += d / t
        g_m2 += d * (x - g_mean)
        if want_trace:
            arms[t - 1] = a
            rewards[t - 1] = x

        if ci < ncp and t == cps[ci]:
            mv_hat_run = rho * g_mean - g_m2 / t
            out_r[ci] = t * (mv_best - mv_hat_run)
            first = 0.0
            cross = 0.0
            for i in range(k):
                ti = float(pulls[i])
                first += ti * delta[i]
                for j in range(k):
                    if j != i:
                        cross += ti * float(pulls[j]) * gamma2[i, j]
            out_p[ci] = first + cross / t
            total = 0.0
            for i in range(k):
                if i != best:
                    total += float(pulls[i]) * (delta[i] + 2.0 * gamma_max2[i])
            out_b[ci] = total
            ci += 1

    return out_r, out_p, out_b, pulls, mu_hat, t_cnt, alpha, beta, arms, rewards


@njit(cache=True)
def _run_bernoulli(
    code,
    lcb_scale,
    p,
    rho,
    n,
    cps,
    mv_best,
    delta,
    gamma2,
    gamma_max2,
    best,
    rng_p,
    rng_e,
    want_trace,
):
    k = p.shape[0]
    alpha = np.ones(k)
    beta = np.ones(k)

    pulls = np.zeros(k, dtype=np.int64)
    arm_mean = np.zeros(k)
    arm_m2 = np.zeros(k)
    g_mean = 0.0
    g_m2 = 0.0

    ncp = cps.shape[0]
    out_r = np.empty(ncp)
    out_p = np.empty(ncp)
    out_b = np.empty(ncp)
    trace_n = n if want_trace else 0
    arms = np.empty(trace_n, dtype=np.int64)
    rewards = np.empty(trace_n)

    ci = 0
    for t in range(1, n + 1):
        a = 0
        bv = -np.inf
        if code == 0:  # Bernoulli TS
            for i in range(k):
                theta = rng_p.beta(alpha[i], beta[i])
                val = rho * theta - theta * (1.0 - theta)
                if val > bv:
                    bv = val
                    a = i
        else:  # optimistic empirical index
            log_t = np.log(float(t))
            for i in range(k):
                tc = alpha[i] + beta[i] - 2.0
                if tc == 0:
                    val = np.inf
                else:
                    p_hat = (alpha[i] - 1.0) / tc
                    val = rho * p_hat - p_hat * (1.0 - p_hat) + lcb_scale * np.sqrt(log_t / tc)
                if val > bv:
                    bv = val
                    a = i

        x = 1.0 if rng_e.random() < p[a] else 0.0
        alpha[a] = alpha[a] + x
        beta[a] = beta[a] + (1.0 - x)

        pulls[a] += 1
        d = x - arm_mean[a]
        arm_mean[a] += d / pulls[a]
        arm_m2[a] += d * (x - arm_mean[a])
        d = x - g_mean
        g_mean += d / t
        g_m2 += d * (x - g_mean)
        if want_trace:
            arms[t - 1] = a
            rewards[t - 1] = x

        if ci < ncp and t == cps[ci]:
            mv_hat_run = rho * g_mean - g_m2 / t
            out_r[ci] = t * (mv_best - mv_hat_run)
            first = 0.0
            cross = 0.0
            for i in range(k):
                ti = float(pulls[i])
                first += ti * delta[i]
                for j in range(k):
                    if j != i:
                        cross += ti * float(pulls[j]) * gamma2[i, j]
            out_p[ci] = first + cross / t
            total = 0.0
            for i in range(k):
                if i != best:
                    total += float(pulls[i]) * (delta[i] + 2.0 * gamma_max2[i])
            out_b[ci] = total
            ci += 1

    return out_r, out_p, out_b, pulls, alpha, beta, arms, rewards


def _simulate_fast(
    kind: PolicyKind,
    instance: BanditInstance,
    gaps: GapTable,
    horizon: int,
    cps: np.ndarray,
    rng_policy: np.random.Generator,
    rng_env: np.random.Generator,
    collect_trace: bool,
) -> RunResult:
    mv_best = float(gaps.mv[gaps.best_arm])
    delta = np.ascontiguousarray(gaps.delta)
    gamma2 = np.ascontiguousarray(np.square(gaps.gamma))
    gamma_max2 = np.ascontiguousarray(gaps.gamma_max2)
    lcb_scale = kind.lcb_width_scale * (5.0 + instance.rho)
    if instance.family == "gaussian":
        out = _run_gaussian(
            _GAUSS_CODES[kind.tag],
            kind.mts_variance_estimator == "two_beta",
            lcb_scale,
            instance.mus,
            np.sqrt(instance.sigma2s),
            instance.rho,
            horizon,
            cps,
            mv_best,
            delta,
            gamma2,
            gamma_max2,
            gaps.best_arm,
            rng_policy,
            rng_env,
            collect_trace,
        )
        realized, pseudo, bound, pulls, mu_hat, t_cnt, alpha, beta, arms, rewards = out
        posterior = {
            "mu_hat": mu_hat,
            "t_count": t_cnt.astype(np.int64),
            "alpha": alpha,
            "beta": beta,
        }
    else:
        out = _run_bernoulli(
            _BERN_CODES[kind.tag],
            lcb_scale,
            instance.mus,
            instance.rho,
            horizon,
            cps,
            mv_best,
            delta,
            gamma2,
            gamma_max2,
            gaps.best_arm,
            rng_policy,
            rng_env,
            collect_trace,
        )
        realized, pseudo, bound, pulls, alpha, beta, arms, rewards = out
        posterior = {"alpha": alpha, "beta": beta}
    return RunResult(
        checkpoints=cps,
        realized=realized,
        pseudo=pseudo,
        bound=bound,
        pulls=pulls,
        posterior=posterior,
        arms=arms if collect_trace else None,
        rewards=rewards if collect_trace else None,
    )


def _simulate_reference(
    kind: PolicyKind,
    instance: BanditInstance,
    gaps: GapTable,
    horizon: int,
    cps: np.ndarray,
    rng_policy: np.random.Generator,
    rng_env: np.random.Generator,
    collect_trace: bool,
) -> RunResult:
    state = PolicyState(kind, instance.n_arms)
    acc = RegretAccumulator(gaps, instance.rho)
    ncp = len(cps)
    realized = np.empty(ncp)
    pseudo = np.empty(ncp)
    bound = np.empty(ncp)
    arms = np.empty(horizon, dtype=np.int64) if collect_trace else None
    rewards = np.empty(horizon) if collect_trace else None
    ci = 0
    for t in range(1, horizon + 1):
        arm, reward, state = step(kind, state, instance, rng_policy, rng_env)
        acc.update(arm, reward)
        if collect_trace:
            arms[t - 1] = arm
            rewards[t - 1] = reward
        if ci < ncp and t == cps[ci]:
            realized[ci], pseudo[ci], bound[ci] = acc.snapshot()
            ci += 1
    if kind.tag.is_gaussian():
        posterior = {
            "mu_hat": state.mu_hat.copy(),
            "t_count": state.t_count.copy(),
            "alpha": state.alpha.copy(),
            "beta": state.beta.copy(),
        }
    else:
        posterior = {"alpha": state.alpha.copy(), "beta": state.beta.copy()}
    return RunResult(
        checkpoints=cps,
        realized=realized,
        pseudo=pseudo,
        bound=bound,
        pulls=acc.pulls.copy(),
        posterior=posterior,
        arms=arms,
        rewards=rewards,
    )


def simulate_run(
    kind: PolicyKind,
    instance: BanditInstance,
    horizon: int,
    checkpoints,
    rng_policy: np.random.Generator,
    rng_env: np.random.Generator,
    *,
    gaps: GapTable | None = None,
    collect_trace: bool = False,
    engine: str = "fast",
) -> RunResult:
    """Simulate one run, recording regret statistics at each checkpoint.

    ``engine="fast"`` uses the compiled kernels; ``engine="reference"``
    runs the plain Python policy loop. Both produce identical output for
    identical generator states.
    """
    kind.check_family(instance)
    cps = np.asarray(checkpoints, dtype=np.int64)
    if cps.size == 0 or np.any(np.diff(cps) <= 0):
        raise ValueError("checkpoints must be a nonempty strictly increasing sequence")
    if cps[0] < 1 or cps[-1] > horizon:
        raise ValueError(f"checkpoints must lie in [1, {horizon}]")
    if gaps is None:
        gaps = gap_table(instance)
    if engine == "fast":
        return _simulate_fast(kind, instance, gaps, horizon, cps, rng_policy, rng_env, collect_trace)
    if engine == "reference":
        return _simulate_reference(kind, instance, gaps, horizon, cps, rng_policy, rng_env, collect_trace)
    raise ValueError(f"engine must be 'fast' or 'reference', got {engine!r}")
