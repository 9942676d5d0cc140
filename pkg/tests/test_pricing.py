import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cev_wkb import (CevParams, MarketSpec, NumericConvergenceError, ParameterDomainError, QuadConfig,
                     cev_call_price, cev_call_price_detailed, feller_to_stock, stock_to_feller)
from cev_wkb import pricing

from oracles import exact_cev_call

REF_M = MarketSpec(100.0, 110.0, 0.03, 1.0)
REF_P = CevParams(0.03, 0.3, -0.5)


@pytest.mark.parametrize("alpha, rel", [(-0.9, 1e-2), (-0.7, 1e-3), (-0.5, 2e-4), (-0.3, 1e-3)])
def test_matches_exact_chi2_price(alpha, rel):
    p = CevParams(0.03, 0.3, alpha)
    want = exact_cev_call(100.0, 110.0, 0.03, 0.03, 0.3, alpha, 1.0)
    assert cev_call_price(REF_M, p) == pytest.approx(want, rel=rel)


@pytest.mark.parametrize("T", [0.5, 1.0, 1.5, 2.0])
def test_matches_exact_price_across_maturities(T):
    m = MarketSpec(100.0, 110.0, 0.03, T)
    want = exact_cev_call(100.0, 110.0, 0.03, 0.03, 0.3, -0.5, T)
    assert cev_call_price(m, REF_P) == pytest.approx(want, rel=1e-3)


def test_reference_value_regression():
    # the exact chi-square price is 0.0135935..., the WKB error there is ~1e-6 relative
    assert cev_call_price(REF_M, REF_P) == pytest.approx(0.013593530293, rel=1e-9)


def test_far_strike_is_negligible():
    assert cev_call_price(MarketSpec(100.0, 1e6, 0.03, 1.0), REF_P) < 1e-8


def test_tiny_strike_martingale_limit():
    # mu = r: the discounted forward is S0 up to the semiclassical error
    price = cev_call_price(MarketSpec(100.0, 1e-6, 0.03, 1.0), REF_P)
    assert price == pytest.approx(100.0, rel=1e-2)


def test_lower_bound_arithmetic():
    assert pricing.integration_lower_bound(110.0, REF_P) == pytest.approx(110.0 / 0.0225, rel=1e-15)


def test_lower_bound_monotone_and_matches_bd_form(rng):
    for _ in range(50):
        p = CevParams(0.03, rng.uniform(0.1, 0.5), rng.uniform(-1.0, -0.1))
        E = rng.uniform(10, 500)
        assert pricing.integration_lower_bound(E, p) == stock_to_feller(E, p)
        assert pricing.integration_lower_bound(E, p) < pricing.integration_lower_bound(E * 1.01, p)
        r = cev_call_price_detailed(MarketSpec(100.0, E, 0.03, 1.0), p)
        assert r.lower_limit == pytest.approx(stock_to_feller(E, p), rel=1e-12)


def test_payoff_exponent_identity(rng):
    for _ in range(50):
        p = CevParams(0.03, rng.uniform(0.1, 0.5), rng.uniform(-1.0, -0.1))
        fp = p.feller
        assert 2.0 - fp.b * fp.d == pytest.approx(-1.0 / p.alpha, rel=1e-13)
        x_T = rng.uniform(10, 1e5)
        k = 2.0 - fp.b * fp.d
        assert (p.sigma * math.sqrt(x_T) / k) ** k == pytest.approx(feller_to_stock(x_T, p), rel=1e-12)


@pytest.mark.parametrize("alpha", [-0.9, -0.7, -0.5, -0.3])
def test_parameterizations_agree(alpha):
    p = CevParams(0.03, 0.3, alpha)
    a = cev_call_price(REF_M, p, parameterization="bd")
    b = cev_call_price(REF_M, p, parameterization="sigma_alpha")
    assert a == pytest.approx(b, rel=1e-10)


def test_unknown_parameterization():
    with pytest.raises(ValueError):
        cev_call_price(REF_M, REF_P, parameterization="xyz")


def test_tolerance_halving():
    p1 = cev_call_price(REF_M, REF_P, QuadConfig(rel_tol=1e-8))
    p2 = cev_call_price(REF_M, REF_P, QuadConfig(rel_tol=5e-9))
    assert abs(p1 - p2) < 1e-8 * p1


@pytest.mark.parametrize("kwargs", [dict(rel_tol=0.1), dict(rel_tol=0.0), dict(max_doublings=-1),
                                    dict(initial_span_multiplier=0.0)])
def test_quad_config_validation(kwargs):
    with pytest.raises(ParameterDomainError):
        QuadConfig(**kwargs)


def test_truncation_cap_reports_estimate():
    q = QuadConfig(max_doublings=0, initial_span_multiplier=0.01)
    with pytest.raises(NumericConvergenceError) as info:
        cev_call_price(REF_M, REF_P, q)
    assert info.value.estimate is not None and info.value.estimate > 0


@settings(max_examples=25, deadline=None)
@given(E=st.floats(60.0, 150.0), alpha=st.floats(-0.9, -0.3), T=st.floats(0.25, 2.0))
def test_price_bounds(E, alpha, T):
    m = MarketSpec(100.0, E, 0.03, T)
    price = cev_call_price(m, CevParams(0.03, 0.3, alpha))
    assert 0.0 <= price <= 100.0
    # with mu = r the WKB price stays near the no-arbitrage floor or above it
    assert price >= max(100.0 - E * math.exp(-0.03 * T), 0.0) - 1e-2


def test_monotone_in_strike():
    prices = [cev_call_price(MarketSpec(100.0, E, 0.03, 1.0), REF_P) for E in np.linspace(60, 160, 21)]
    assert all(b < a for a, b in zip(prices, prices[1:]))


def test_degenerate_node_is_nudged():
    fp = REF_P.feller
    x = stock_to_feller(100.0, REF_P)
    x_deg = x * math.exp(fp.b * 1.0)   # d = 0: D2 vanishes where x = x_T e^{-bT}
    counter = [0]
    vals = pricing.kernel_values(x, np.array([x_deg, x_deg * 1.01]), fp, 1.0, counter)
    assert counter[0] == 1
    assert np.all(vals > 0)
    neighbour = pricing.kernel_values(x, np.array([x_deg * (1 + 1e-6)]), fp, 1.0)[0]
    assert vals[0] == pytest.approx(neighbour, rel=1e-4)
