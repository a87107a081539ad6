import numpy as np
import pytest

from mvbandit.env import BanditInstance, BernoulliArm, GaussianArm, gap_table
from mvbandit.policies import PolicyKind, PolicyTag
from mvbandit.regret import RunTrace, pseudo_regret, pull_count_bound, realized_regret
from mvbandit.rng import derive_stream
from mvbandit.simulate import simulate_run

GAUSS = BanditInstance(
    (GaussianArm(0.5, 0.1), GaussianArm(0.3, 0.4), GaussianArm(0.6, 0.7)), rho=0.7
)
BERN = BanditInstance((BernoulliArm(0.3), BernoulliArm(0.55), BernoulliArm(0.7)), rho=0.4)

ALL_KINDS = [
    (PolicyKind(PolicyTag.MTS), GAUSS),
    (PolicyKind(PolicyTag.MTS, mts_variance_estimator="two_beta"), GAUSS),
    (PolicyKind(PolicyTag.VTS), GAUSS),
    (PolicyKind(PolicyTag.MVTS), GAUSS),
    (PolicyKind(PolicyTag.MV_LCB_GAUSSIAN), GAUSS),
    (PolicyKind(PolicyTag.MV_LCB_GAUSSIAN, lcb_width_scale=0.25), GAUSS),
    (PolicyKind(PolicyTag.BMVTS), BERN),
    (PolicyKind(PolicyTag.MV_LCB_BERNOULLI), BERN),
]


@pytest.mark.parametrize("kind, instance", ALL_KINDS, ids=lambda v: getattr(v, "tag", v) and str(v)[:30])
def test_fast_engine_matches_reference_exactly(kind, instance):
    n = 400
    cps = (3, 17, 200, 400)
    results = {}
    for engine in ("fast", "reference"):
        rng_p = derive_stream(321, (0,))
        rng_e = derive_stream(321, (1,))
        results[engine] = simulate_run(
            kind, instance, n, cps, rng_p, rng_e, engine=engine, collect_trace=True
        )
    fast, ref = results["fast"], results["reference"]
    assert np.array_equal(fast.arms, ref.arms)
    assert np.array_equal(fast.rewards, ref.rewards)
    assert np.array_equal(fast.realized, ref.realized)
    assert np.array_equal(fast.pseudo, ref.pseudo)
    assert np.array_equal(fast.bound, ref.bound)
    assert np.array_equal(fast.pulls, ref.pulls)
    assert fast.posterior.keys() == ref.posterior.keys()
    for key in fast.posterior:
        assert np.array_equal(fast.posterior[key], ref.posterior[key]), key


@pytest.mark.parametrize("engine", ["fast", "reference"])
def test_checkpoint_stats_match_pure_trace_functions(engine):
    kind = PolicyKind(PolicyTag.MVTS)
    n = 300
    cps = (5, 50, 300)
    res = simulate_run(
        kind, GAUSS, n, cps, derive_stream(7, (0,)), derive_stream(7, (1,)),
        engine=engine, collect_trace=True,
    )
    gaps = gap_table(GAUSS)
    for c, cp in enumerate(cps):
        prefix = RunTrace.from_rounds(res.arms[:cp], res.rewards[:cp], GAUSS.n_arms)
        b = realized_regret(prefix, gaps, GAUSS.rho)
        assert res.realized[c] == pytest.approx(b.realized_regret, rel=1e-9, abs=1e-9)
        assert res.pseudo[c] == pytest.approx(pseudo_regret(prefix, gaps), rel=1e-12)
        assert res.bound[c] == pytest.approx(pull_count_bound(prefix, gaps), rel=1e-12)


def test_posterior_tracks_trace():
    kind = PolicyKind(PolicyTag.MVTS)
    res = simulate_run(
        kind, GAUSS, 200, (200,), derive_stream(8, (0,)), derive_stream(8, (1,)),
        collect_trace=True,
    )
    for i in range(GAUSS.n_arms):
        xs = res.rewards[res.arms == i]
        assert res.posterior["t_count"][i] == len(xs)
        assert res.posterior["mu_hat"][i] == pytest.approx(xs.mean(), rel=1e-12)
        ss = np.sum((xs - res.posterior["mu_hat"][i]) ** 2)
        assert 2.0 * res.posterior["beta"][i] - 1.0 == pytest.approx(ss, rel=1e-9, abs=1e-12)


def test_checkpoint_validation():
    kind = PolicyKind(PolicyTag.MVTS)
    with pytest.raises(ValueError):
        simulate_run(kind, GAUSS, 100, (), derive_stream(1), derive_stream(2))
    with pytest.raises(ValueError):
        simulate_run(kind, GAUSS, 100, (10, 10), derive_stream(1), derive_stream(2))
    with pytest.raises(ValueError):
        simulate_run(kind, GAUSS, 100, (10, 101), derive_stream(1), derive_stream(2))
    with pytest.raises(ValueError):
        simulate_run(kind, GAUSS, 100, (100,), derive_stream(1), derive_stream(2), engine="turbo")
