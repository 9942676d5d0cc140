"""Exact Black-Scholes propagator and European call, closed form and by quadrature.

The Black-Scholes Hamiltonian is quadratic, so its semiclassical kernel is
exact.  Pricing the call by integrating that kernel against the payoff gives
an independent check of the closed form and of the quadrature machinery that
the CEV pricer reuses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .core import MarketSpec
from .errors import ParameterDomainError
from .quadrature import integrate_half_line

#: Initial truncation half-width, in units of sigma*sqrt(T).
TRUNCATION_SIGMAS = 12.0

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class BsParams:
    sigma: float
    rate: float

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise ParameterDomainError(f"sigma must be > 0, got {self.sigma!r}")

    @property
    def mu_eff(self) -> float:
        """Log-price drift ``r - sigma**2 / 2``."""
        return self.rate - 0.5 * self.sigma * self.sigma


def norm_cdf(z):
    """Standard normal CDF as ``erfc(-z / sqrt(2)) / 2``.

    Using the complementary error function keeps full relative accuracy in
    the lower tail, where ``(1 + erf(z/sqrt 2)) / 2`` cancels.
    """
    return 0.5 * erfc(-np.asarray(z, dtype=float) / _SQRT2)


def bs_propagator(x, x_T, T: float, p: BsParams):
    """Kernel ``K(x, 0 | x_T, T)`` in log-price, discount ``exp(-rT)`` included."""
    if not T > 0.0:
        raise ParameterDomainError(f"T must be > 0, got {T!r}")
    var = p.sigma * p.sigma * T
    z = np.asarray(x_T, dtype=float) - np.asarray(x, dtype=float) - p.mu_eff * T
    return np.exp(-0.5 * z * z / var - p.rate * T) / math.sqrt(2.0 * math.pi * var)


def bs_call_closed(m: MarketSpec, sigma: float) -> float:
    """Standard Black-Scholes call ``S0 N(d1) - E exp(-rT) N(d2)``."""
    if not sigma > 0.0:
        raise ParameterDomainError(f"sigma must be > 0, got {sigma!r}")
    vol = sigma * math.sqrt(m.maturity)
    d1 = (math.log(m.s0 / m.strike) + (m.rate + 0.5 * sigma * sigma) * m.maturity) / vol
    d2 = d1 - vol
    disc = math.exp(-m.rate * m.maturity)
    return float(m.s0 * norm_cdf(d1) - m.strike * disc * norm_cdf(d2))


def _payoff_integral(m: MarketSpec, sigma: float, tol: float, put: bool) -> float:
    if not 0.0 < tol <= 1e-3:
        raise ParameterDomainError(f"tol must lie in (0, 1e-3], got {tol!r}")
    p = BsParams(sigma=sigma, rate=m.rate)
    x0 = math.log(m.s0)
    log_e = math.log(m.strike)
    width = sigma * math.sqrt(m.maturity)
    centre = x0 + p.mu_eff * m.maturity

    def integrand(xt):
        k = bs_propagator(x0, xt, m.maturity, p)
        pay = (m.strike - np.exp(xt)) if put else (np.exp(xt) - m.strike)
        return k * np.maximum(pay, 0.0)

    direction = -1 if put else 1
    span = max(direction * (centre - log_e), 0.0) + TRUNCATION_SIGMAS * width
    res = integrate_half_line(integrand, log_e, span, 0.5 * width, direction=direction,
                              rel_tol=tol * 1e-2)
    return res.value


def bs_call_quadrature(m: MarketSpec, sigma: float, tol: float = 1e-8) -> float:
    """Call price by integrating the propagator against ``(e^{x_T} - E)`` above ``log E``."""
    return _payoff_integral(m, sigma, tol, put=False)


def bs_put_quadrature(m: MarketSpec, sigma: float, tol: float = 1e-8) -> float:
    """Put price through the same machinery, integrating below ``log E``."""
    return _payoff_integral(m, sigma, tol, put=True)
