import numpy as np
import pytest

from cev_wkb import CevParams, MarketSpec


@pytest.fixture
def ref_cev():
    return CevParams(mu=0.03, sigma=0.3, alpha=-0.5)


@pytest.fixture
def ref_market():
    return MarketSpec(s0=100.0, strike=110.0, rate=0.03, maturity=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
