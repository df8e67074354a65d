import pytest
from hypothesis import HealthCheck, settings

from extreme_gibbs.model import make_exp_exponential, make_half_gaussian, make_weibull

settings.register_profile(
    "suite",
    max_examples=25,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def weibull2():
    return make_weibull(2.0)


@pytest.fixture(scope="session")
def half_gauss():
    return make_half_gaussian()


@pytest.fixture(scope="session")
def exp_exp():
    return make_exp_exponential()
