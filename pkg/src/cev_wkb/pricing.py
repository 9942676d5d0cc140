"""European call under the WKB CEV kernel.

The price is the discounted integral of the kernel against the payoff
written in Feller coordinates,

    psi = e^{-rT} int_{x_min}^inf K(x, 0 | x_T, T) [S(x_T) - E] dx_T,

where ``x = stock_to_feller(S0)`` and ``x_min = stock_to_feller(E)`` marks
where the payoff switches on.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import kernel as kn
from .core import CevParams, FellerParams, MarketSpec, stock_to_feller
from .errors import (
    DegeneratePathError,
    LogDomainError,
    NonPositiveJError,
    ParameterDomainError,
)
from .quadrature import integrate_half_line

log = logging.getLogger(__name__)

#: First relative nudge applied to an ill-defined node, then multiplied by 4.
NUDGE_REL = 1e-9
NUDGE_ATTEMPTS = 8


@dataclass(frozen=True)
class QuadConfig:
    """Tolerance and truncation controls of the pricing quadrature.

    The first integration span is ``(centre - x_min)^+ + initial_span_multiplier * w``
    where ``w = sqrt(2 max(centre, x_min) T)`` is the diffusion length of the
    Feller process; it is then doubled up to ``max_doublings`` times.
    """

    rel_tol: float = 1e-8
    max_doublings: int = 40
    initial_span_multiplier: float = 20.0

    def __post_init__(self):
        if not 1e-12 <= self.rel_tol <= 1e-4:
            raise ParameterDomainError(f"rel_tol must lie in [1e-12, 1e-4], got {self.rel_tol!r}")
        if not 0 <= self.max_doublings <= 60:
            raise ParameterDomainError(f"max_doublings must lie in [0, 60], got {self.max_doublings!r}")
        if not self.initial_span_multiplier > 0:
            raise ParameterDomainError("initial_span_multiplier must be > 0")


@dataclass(frozen=True)
class PriceResult:
    price: float
    error_estimate: float
    lower_limit: float
    n_evaluations: int
    n_nudged: int


_ERRORS = {
    kn.DEGENERATE: DegeneratePathError,
    kn.LOG_DOMAIN: LogDomainError,
    kn.NONPOSITIVE_J: NonPositiveJError,
}


def kernel_values(x: float, x_T, fp: FellerParams, T: float, counter: list | None = None):
    """Kernel at many ``x_T`` nodes, nudging ill-defined nodes.

    A node whose closed forms are undefined (``D2`` below the degeneracy
    threshold, log ratio or ``J`` out of domain) is moved by a relative
    ``1e-9``, growing fourfold per attempt.  This is harmless under an
    integral.  A node still undefined after the last attempt raises the
    corresponding :class:`~cev_wkb.errors.KernelDomainError`.
    """
    x_T = np.asarray(x_T, dtype=float)
    logk, status = kn.log_kernel_arrays(x, x_T, fp.b, fp.d, T)
    bad = np.flatnonzero(status != kn.OK)
    if bad.size:
        log.debug("nudging %d kernel node(s) at T=%g", bad.size, T)
        if counter is not None:
            counter[0] += bad.size
        logk = np.array(logk, copy=True)
        todo = bad
        rel = NUDGE_REL
        for _ in range(NUDGE_ATTEMPTS):
            lk, st = kn.log_kernel_arrays(x, x_T.flat[todo] * (1.0 + rel), fp.b, fp.d, T)
            good = st == kn.OK
            logk.flat[todo[good]] = lk[good]
            todo, last = todo[~good], st[~good]
            if not todo.size:
                break
            rel *= 4.0
        else:
            xt = float(x_T.flat[todo[0]])
            raise _ERRORS[int(last[0])]("kernel undefined after nudging", (x, xt, T))
    return np.exp(logk)


def integration_lower_bound(E: float, p: CevParams) -> float:
    """Feller coordinate above which the call pays: ``E**(-2 alpha) / (sigma alpha)**2``."""
    return stock_to_feller(E, p)


def _payoff_bd(x_T, fp, sigma, E):
    k = 2.0 - fp.b * fp.d
    return (sigma * np.sqrt(x_T) / k) ** k - E


def _payoff_sigma_alpha(x_T, p, E):
    return (p.sigma**2 * p.alpha**2 * x_T) ** (-0.5 / p.alpha) - E


def cev_call_price_detailed(m: MarketSpec, p: CevParams, q: QuadConfig | None = None,
                            parameterization: str = "bd") -> PriceResult:
    """Price plus quadrature diagnostics; see :func:`cev_call_price`."""
    q = QuadConfig() if q is None else q
    fp = p.feller
    T = m.maturity
    x = stock_to_feller(m.s0, p)
    if parameterization == "bd":
        k = 2.0 - fp.b * fp.d
        x_min = (k / p.sigma) ** 2 * m.strike ** (2.0 / k)

        def payoff(xt):
            return _payoff_bd(xt, fp, p.sigma, m.strike)
    elif parameterization == "sigma_alpha":
        x_min = (p.sigma * p.alpha * m.strike**p.alpha) ** -2

        def payoff(xt):
            return _payoff_sigma_alpha(xt, p, m.strike)
    else:
        raise ValueError(f"unknown parameterization {parameterization!r}")

    counter = [0]

    def integrand(xt):
        return kernel_values(x, xt, fp, T, counter) * np.maximum(payoff(xt), 0.0)

    centre = fp.d + (x - fp.d) * math.exp(-fp.b * T)
    width = math.sqrt(2.0 * max(centre, x_min) * T)
    span = max(centre - x_min, 0.0) + q.initial_span_multiplier * width
    res = integrate_half_line(integrand, x_min, span, 0.5 * width, rel_tol=q.rel_tol,
                              max_doublings=q.max_doublings)
    disc = math.exp(-m.rate * T)
    if counter[0]:
        log.info("pricing nudged %d degenerate kernel node(s)", counter[0])
    return PriceResult(price=disc * res.value, error_estimate=disc * res.error,
                       lower_limit=x_min, n_evaluations=res.n_evaluations, n_nudged=counter[0])


def cev_call_price(m: MarketSpec, p: CevParams, q: QuadConfig | None = None,
                   parameterization: str = "bd") -> float:
    """European call price under the semiclassical CEV kernel.

    Parameters
    ----------
    m : MarketSpec
        Spot, strike, discount rate and maturity.
    p : CevParams
        Model parameters; ``mu`` is used as given (pass ``mu = rate`` for the
        risk-neutral price).
    q : QuadConfig, optional
        Quadrature tolerance and truncation controls.
    parameterization : {"bd", "sigma_alpha"}
        Whether the payoff and the lower limit are written through the
        kernel's ``(b, d)`` or the market's ``(sigma, alpha)``.  Both describe
        the same integrand.

    Raises
    ------
    NumericConvergenceError
        If the tail cannot be made negligible within ``q.max_doublings``; the
        exception carries the running integral and the last panel as bound.
    """
    return cev_call_price_detailed(m, p, q, parameterization).price
