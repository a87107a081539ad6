import pytest
from hypothesis import HealthCheck, settings

from mvbandit.env import BanditInstance, BernoulliArm, GaussianArm

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def two_arm_gaussian() -> BanditInstance:
    """Small instance with a clear value gap: best arm 0 at rho = 0.01."""
    return BanditInstance((GaussianArm(0.5, 0.1), GaussianArm(0.4, 0.3)), rho=0.01)


@pytest.fixture
def three_arm_bernoulli() -> BanditInstance:
    return BanditInstance((BernoulliArm(0.25), BernoulliArm(0.6), BernoulliArm(0.45)), rho=0.3)
