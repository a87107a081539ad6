import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mvbandit.env import (
    BanditInstance,
    BernoulliArm,
    GaussianArm,
    benchmark_bernoulli15,
    benchmark_gaussian15,
    gap_table,
    instance_from_dict,
    instance_to_dict,
    load_instance,
    mean_variance,
    sample_reward,
)
from mvbandit.rng import derive_stream

# Transcribed independently from the benchmark definition; the bundled data
# files must match these exactly.
MU15 = [0.1, 0.2, 0.23, 0.27, 0.32, 0.32, 0.34, 0.41, 0.43, 0.54, 0.55, 0.56, 0.67, 0.71, 0.79]
SIGMA2_15 = [0.05, 0.34, 0.28, 0.09, 0.23, 0.72, 0.19, 0.14, 0.44, 0.53, 0.24, 0.36, 0.56, 0.49, 0.85]


def test_mean_variance_values():
    assert mean_variance(0.1, 0.05, rho=1.0) == pytest.approx(0.05)
    assert mean_variance(123.0, 0.7, rho=0.0) == -0.7
    assert mean_variance(0.79, 0.85, rho=10.0) == pytest.approx(7.05)
    with pytest.raises(ValueError):
        mean_variance(0.0, -0.1, rho=1.0)


class TestGapTable:
    def brute_force_best(self, instance):
        values = [mean_variance(a.mu, a.sigma2, instance.rho) for a in instance.arms]
        return max(range(len(values)), key=lambda i: (values[i], -i))

    @pytest.mark.parametrize(
        "rho, expected_arm",
        [(1e-3, 0), (1.0, 10), (1000.0, 14)],
    )
    def test_benchmark_best_arm(self, rho, expected_arm):
        instance = benchmark_gaussian15(rho=rho)
        gaps = gap_table(instance)
        assert gaps.best_arm == self.brute_force_best(instance)
        assert gaps.best_arm == expected_arm
        if rho == 1.0:
            assert gaps.mv[gaps.best_arm] == pytest.approx(0.31)

    def test_gap_properties_brute_force(self):
        instance = benchmark_gaussian15(rho=0.7)
        gaps = gap_table(instance)
        best_mv = gaps.mv[gaps.best_arm]
        for i, arm in enumerate(instance.arms):
            assert best_mv >= gaps.mv[i]
            assert gaps.delta[i] == best_mv - gaps.mv[i]
            assert gaps.delta[i] >= 0
            worst = max((arm.mu - other.mu) ** 2 for other in instance.arms)
            assert gaps.gamma_max2[i] == worst
            for j, other in enumerate(instance.arms):
                assert gaps.gamma[i, j] == arm.mu - other.mu
                assert gaps.gamma[i, j] == -gaps.gamma[j, i]
        assert gaps.delta[gaps.best_arm] == 0.0

    def test_bernoulli_variance_is_derived(self):
        instance = benchmark_bernoulli15(rho=0.4)
        gaps = gap_table(instance)
        ps = np.array([a.p for a in instance.arms])
        assert np.array_equal(gaps.sigma2s, ps * (1 - ps))

    @given(
        mus=st.lists(st.floats(-5, 5), min_size=2, max_size=8),
        rho=st.floats(0, 100),
    )
    def test_best_arm_is_argmax(self, mus, rho):
        arms = tuple(GaussianArm(m, 0.1 + 0.05 * i) for i, m in enumerate(mus))
        gaps = gap_table(BanditInstance(arms, rho))
        assert all(gaps.mv[gaps.best_arm] >= v for v in gaps.mv)
        # ties break toward the lowest index
        top = [i for i, v in enumerate(gaps.mv) if v == gaps.mv[gaps.best_arm]]
        assert gaps.best_arm == top[0]


class TestSampleReward:
    def test_degenerate_bernoulli(self):
        rng = derive_stream(1)
        ones = BanditInstance((BernoulliArm(1.0), BernoulliArm(0.0)), rho=0.5)
        draws0 = [sample_reward(ones, 0, rng) for _ in range(200)]
        draws1 = [sample_reward(ones, 1, rng) for _ in range(200)]
        assert set(draws0) == {1.0}
        assert set(draws1) == {0.0}

    def test_gaussian_moments(self):
        instance = BanditInstance((GaussianArm(0.5, 0.09), GaussianArm(0.0, 1.0)), rho=1.0)
        rng = derive_stream(2)
        n = 10**6
        xs = np.array([sample_reward(instance, 0, rng) for _ in range(n)])
        se_mean = 0.3 / math.sqrt(n)
        assert abs(xs.mean() - 0.5) < 4 * se_mean
        var = xs.var()
        se_var = 0.09 * math.sqrt(2.0 / n)
        assert abs(var - 0.09) < 5 * se_var

    def test_out_of_range(self, two_arm_gaussian):
        with pytest.raises(IndexError):
            sample_reward(two_arm_gaussian, 2, derive_stream(3))


@given(rho=st.floats(0.01, 0.99), p=st.floats(0.0, 1.0))
def test_bernoulli_mv_mirror_symmetry(rho, p):
    q = 1.0 - rho - p
    if not 0.0 <= q <= 1.0:
        return
    lhs = mean_variance(p, p * (1 - p), rho)
    rhs = mean_variance(q, q * (1 - q), rho)
    assert lhs == pytest.approx(rhs, abs=1e-12)


class TestValidation:
    def test_needs_two_arms(self):
        with pytest.raises(ValueError):
            BanditInstance((GaussianArm(0.0, 1.0),), rho=1.0)

    def test_homogeneous_family(self):
        with pytest.raises(ValueError):
            BanditInstance((GaussianArm(0.0, 1.0), BernoulliArm(0.5)), rho=1.0)

    def test_parameter_ranges(self):
        with pytest.raises(ValueError):
            GaussianArm(0.0, 0.0)
        with pytest.raises(ValueError):
            BernoulliArm(1.5)
        with pytest.raises(ValueError):
            BanditInstance((GaussianArm(0, 1), GaussianArm(1, 1)), rho=-0.1)

    def test_unknown_keys_rejected(self):
        with pytest.raises(ValueError, match="unknown"):
            instance_from_dict({"family": "gaussian", "mu": [0, 1], "sigma2": [1, 1], "rho": 1, "extra": 2})

    def test_mismatched_lengths(self):
        with pytest.raises(ValueError):
            instance_from_dict({"family": "gaussian", "mu": [0, 1], "sigma2": [1], "rho": 1})

    def test_large_variance_warns(self):
        with pytest.warns(UserWarning, match="variance"):
            instance_from_dict({"family": "gaussian", "mu": [0, 1], "sigma2": [1.0, 1.5], "rho": 1})


class TestInstanceFiles:
    def test_bundled_gaussian_matches_transcription(self):
        instance = benchmark_gaussian15()
        assert instance.n_arms == 15
        assert [a.mu for a in instance.arms] == MU15
        assert [a.sigma2 for a in instance.arms] == SIGMA2_15

    def test_bundled_bernoulli_matches_transcription(self):
        instance = benchmark_bernoulli15()
        assert instance.n_arms == 15
        assert [a.p for a in instance.arms] == MU15

    def test_round_trip(self, tmp_path, two_arm_gaussian):
        path = tmp_path / "inst.json"
        path.write_text(json.dumps(instance_to_dict(two_arm_gaussian)))
        loaded = load_instance(path)
        assert loaded == two_arm_gaussian
