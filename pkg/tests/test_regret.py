import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mvbandit.env import BanditInstance, GaussianArm, gap_table
from mvbandit.regret import (
    RegretAccumulator,
    RunTrace,
    empirical_mv,
    pseudo_regret,
    pull_count_bound,
    realized_regret,
)
from mvbandit.rng import derive_stream


@pytest.fixture
def gaps_rho0(two_arm_gaussian):
    return gap_table(two_arm_gaussian.with_rho(0.0))


@pytest.fixture
def gaps_small_rho(two_arm_gaussian):
    return gap_table(two_arm_gaussian)  # rho = 0.01, delta_2 = 0.201


def test_empirical_mv_values():
    assert empirical_mv([1.0, 1.0], rho=1.0) == 1.0
    assert empirical_mv([0.0, 1.0], rho=1.0) == pytest.approx(0.25)
    assert empirical_mv([2.0], rho=0.5) == 1.0
    with pytest.raises(ValueError):
        empirical_mv([], rho=1.0)


class TestRealizedRegret:
    def test_constant_rewards_on_best_arm(self, two_arm_gaussian):
        # rewards identically mu_1: empirical variance 0, so regret = -n sigma_1^2
        rho = two_arm_gaussian.rho
        gaps = gap_table(two_arm_gaussian)
        n = 8
        trace = RunTrace.from_rounds([0] * n, [0.5] * n, 2)
        b = realized_regret(trace, gaps, rho)
        assert b.realized_regret == pytest.approx(-n * 0.1)
        assert b.r1 == pytest.approx(-n * 0.1)
        assert b.r2 == 0.0
        assert b.pseudo_first == 0.0
        assert b.pseudo_cross == 0.0

    def test_two_round_hand_example(self, gaps_rho0):
        trace = RunTrace.from_rounds([0, 1], [0.0, 0.0], 2)
        b = realized_regret(trace, gaps_rho0, rho=0.0)
        assert b.realized_regret == pytest.approx(-0.2)

    def test_pseudo_terms_hand_example(self, gaps_small_rho):
        trace = RunTrace.from_rounds([0, 1], [0.3, -0.2], 2)
        b = realized_regret(trace, gaps_small_rho, rho=0.01)
        assert b.pseudo_first == pytest.approx(0.201)
        assert b.pseudo_cross == pytest.approx(0.01)
        assert pseudo_regret(trace, gaps_small_rho) == pytest.approx(0.211)

    def test_mismatched_arms_rejected(self, gaps_rho0):
        trace = RunTrace.from_rounds([0, 1, 2], [0.0, 0.0, 0.0], 3)
        with pytest.raises(ValueError):
            realized_regret(trace, gaps_rho0, rho=0.0)


class TestPullCountBound:
    def test_zero_when_only_best_pulled(self, gaps_small_rho):
        trace = RunTrace.from_rounds([0, 0, 0], [0.1, 0.2, 0.3], 2)
        assert pull_count_bound(trace, gaps_small_rho) == 0.0
        assert pseudo_regret(trace, gaps_small_rho) == 0.0

    def test_two_arm_hand_example(self, gaps_small_rho):
        trace = RunTrace.from_rounds([0, 1], [0.0, 0.0], 2)
        assert pull_count_bound(trace, gaps_small_rho) == pytest.approx(0.221)
        assert pull_count_bound(trace, gaps_small_rho) >= pseudo_regret(trace, gaps_small_rho)

    def test_round_robin_closed_form(self):
        instance = BanditInstance(
            (GaussianArm(0.2, 0.3), GaussianArm(0.5, 0.2), GaussianArm(0.1, 0.4)), rho=0.8
        )
        gaps = gap_table(instance)
        k = 3
        trace = RunTrace.from_rounds(range(k), [0.0] * k, k)
        expected_pseudo = sum(gaps.delta) + sum(
            gaps.gamma[i, j] ** 2 for i in range(k) for j in range(k) if i != j
        ) / k
        assert pseudo_regret(trace, gaps) == pytest.approx(expected_pseudo, rel=1e-12)
        expected_bound = sum(
            gaps.delta[i] + 2 * gaps.gamma_max2[i] for i in range(k) if i != gaps.best_arm
        )
        assert pull_count_bound(trace, gaps) == pytest.approx(expected_bound, rel=1e-12)
        assert pull_count_bound(trace, gaps) >= pseudo_regret(trace, gaps)


traces = st.integers(2, 6).flatmap(
    lambda k: st.tuples(
        st.just(k),
        st.lists(
            st.tuples(st.integers(0, k - 1), st.floats(-100.0, 100.0)),
            min_size=1,
            max_size=40,
        ),
        st.floats(0.0, 3.0),
        st.integers(0, 2**31),
    )
)


@given(traces)
def test_trace_invariants(params):
    k, rounds, rho, seed = params
    arms = [a for a, _ in rounds]
    rewards = [x for _, x in rounds]
    trace = RunTrace.from_rounds(arms, rewards, k)
    arm_rng = np.random.default_rng(seed)
    instance = BanditInstance(
        tuple(
            GaussianArm(float(m), float(s))
            for m, s in zip(arm_rng.uniform(-1, 1, k), arm_rng.uniform(0.05, 1.0, k))
        ),
        rho=rho,
    )
    gaps = gap_table(instance)
    b = realized_regret(trace, gaps, rho)

    # variance decomposition: total variance = pull-weighted within + between
    mean = np.mean(rewards)
    var = np.mean((np.asarray(rewards) - mean) ** 2)
    within = between = 0.0
    for i in range(k):
        xs = trace.rewards[trace.arms == i]
        if len(xs):
            within += len(xs) * np.mean((xs - np.mean(xs)) ** 2)
            between += len(xs) * (np.mean(xs) - mean) ** 2
    assert abs(var - (within + between) / trace.n) <= 1e-9 * max(1.0, abs(var))

    # the split reproduces the realized regret
    assert abs(b.realized_regret - (b.r1 + b.r2)) <= 1e-9 * (1.0 + abs(b.r1) + abs(b.r2))
    assert b.r2 >= 0.0

    # pull-count bound dominates pseudo-regret
    assert pull_count_bound(trace, gaps) >= pseudo_regret(trace, gaps) - 1e-12


def test_trace_validation():
    with pytest.raises(ValueError):
        RunTrace(np.array([0, 1]), np.array([0.0, 1.0]), np.array([2, 0]))
    with pytest.raises(ValueError):
        RunTrace(np.array([0, 1]), np.array([0.0]), np.array([1, 1]))
    trace = RunTrace.from_rounds([0, 1, 0], [1.0, 2.0, 3.0], 3)
    assert list(trace.pull_counts) == [2, 1, 0]
    assert trace.n == 3


def test_accumulator_matches_trace_functions():
    rng = derive_stream(60)
    for _ in range(40):
        k = int(rng.integers(2, 6))
        n = int(rng.integers(2, 60))
        instance = BanditInstance(
            tuple(GaussianArm(float(m), float(s)) for m, s in
                  zip(rng.normal(0, 1, k), rng.uniform(0.1, 1.0, k))),
            rho=float(rng.uniform(0, 2)),
        )
        gaps = gap_table(instance)
        arms = rng.integers(0, k, n)
        rewards = rng.normal(0, 1, n)
        acc = RegretAccumulator(gaps, instance.rho)
        for a, x in zip(arms, rewards):
            acc.update(int(a), float(x))
        realized, pseudo, bound = acc.snapshot()
        trace = RunTrace.from_rounds(arms, rewards, k)
        b = realized_regret(trace, gaps, instance.rho)
        assert realized == pytest.approx(b.realized_regret, rel=1e-9, abs=1e-9)
        assert pseudo == pytest.approx(pseudo_regret(trace, gaps), rel=1e-12, abs=1e-12)
        assert bound == pytest.approx(pull_count_bound(trace, gaps), rel=1e-12, abs=1e-12)
