import numpy as np
import pytest
from hypothesis import settings

from swagg.data_core import Assumption, AssumptionParams

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def make_params(kind="binomial", mu=10.0, sigma=2.0, p=0.4, m=1, ell=200, c_min=None,
                c_max=None):
    kind = Assumption(kind)
    if kind is Assumption.ALWAYS:
        p, m = 1.0, 1
    if kind is Assumption.BINOMIAL:
        m = 1
    c_min = mu - 3 * sigma if c_min is None else c_min
    c_max = mu + 3 * sigma if c_max is None else c_max
    return AssumptionParams(kind=kind, mu=mu, sigma=sigma, p=p, m=m, ell=ell, c_min=c_min,
                            c_max=c_max)


@pytest.fixture
def params():
    return make_params


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
