"""Risk-averse (mean-variance) multi-armed bandits.

Thompson Sampling policies and LCB baselines for Gaussian and Bernoulli
arm families, per-trace regret accounting, an analytic bound toolkit, and
a seeded, parallel Monte Carlo experiment harness.
"""

__version__ = "0.1.0"

from .env import BanditInstance, BernoulliArm, GapTable, GaussianArm, gap_table, mean_variance, sample_reward
from .policies import PolicyKind, PolicyState, PolicyTag, select_arm, step
from .posterior import BetaState, NormalGammaState, beta_sample, beta_update, ng_sample_mean, ng_sample_precision, ng_update
from .regret import RegretBreakdown, RunTrace, empirical_mv, pseudo_regret, pull_count_bound, realized_regret

__all__ = [
    "BanditInstance",
    "BernoulliArm",
    "BetaState",
    "GapTable",
    "GaussianArm",
    "NormalGammaState",
    "PolicyKind",
    "PolicyState",
    "PolicyTag",
    "RegretBreakdown",
    "RunTrace",
    "beta_sample",
    "beta_update",
    "empirical_mv",
    "gap_table",
    "mean_variance",
    "ng_sample_mean",
    "ng_sample_precision",
    "ng_update",
    "pseudo_regret",
    "pull_count_bound",
    "realized_regret",
    "sample_reward",
    "select_arm",
    "step",
]
