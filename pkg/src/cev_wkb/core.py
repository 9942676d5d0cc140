"""Model parameters, the Feller reduction and the stock <-> Feller change of variables.

The CEV price process ``dS = mu S dt + sigma S**(alpha+1) dW`` is mapped to a
Feller diffusion through ``S**(-2 alpha) = sigma**2 alpha**2 X``.  The
backward generator in the new coordinate is ``2x d2/dx2 + (a - b x) d/dx`` with
``a = 2 + 1/alpha`` and ``b = 2 alpha mu``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ParameterDomainError

#: Largest admissible elasticity exponent; the reduction is singular at 0.
ALPHA_MAX = -1e-6
#: Below this magnitude the semiclassical approximation is known to degrade.
ALPHA_WARN = -0.1


@dataclass(frozen=True)
class CevParams:
    """Market-side CEV parameters.

    Parameters
    ----------
    mu : float
        Drift rate (1/year).  Must be nonzero.
    sigma : float
        Volatility prefactor multiplying ``S**(alpha+1)``.
    alpha : float
        Elasticity exponent in ``[-1, -1e-6]``.
    """

    mu: float
    sigma: float
    alpha: float

    def __post_init__(self):
        for name in ("mu", "sigma", "alpha"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ParameterDomainError(f"{name} must be finite, got {value!r}")
        if self.sigma <= 0.0:
            raise ParameterDomainError(f"sigma must be > 0, got {self.sigma!r}")
        if self.alpha < -1.0:
            raise ParameterDomainError(f"alpha must be >= -1, got {self.alpha!r}")
        if self.alpha > ALPHA_MAX:
            raise ParameterDomainError(
                f"alpha must be < 0 (at most {ALPHA_MAX}), got {self.alpha!r}"
            )
        if self.mu == 0.0:
            raise ParameterDomainError("mu must be nonzero (b = 2*alpha*mu divides every closed form)")
        if self.alpha > ALPHA_WARN:
            warnings.warn(
                f"alpha={self.alpha} is close to 0; the semiclassical kernel degrades there",
                RuntimeWarning,
                stacklevel=3,
            )

    @property
    def feller(self) -> FellerParams:
        return derive_feller_params(self)


@dataclass(frozen=True)
class FellerParams:
    """Coefficients of the reduced generator ``2x d2 + (a - b x) d``; ``d = a / b``."""

    a: float
    b: float
    d: float

    def __post_init__(self):
        if self.b == 0.0 or not math.isfinite(self.b):
            raise ParameterDomainError(f"b must be finite and nonzero, got {self.b!r}")
        if not math.isfinite(self.d):
            raise ParameterDomainError(f"d must be finite, got {self.d!r}")


@dataclass(frozen=True)
class MarketSpec:
    """European call contract terms."""

    s0: float
    strike: float
    rate: float
    maturity: float

    def __post_init__(self):
        if not self.s0 > 0.0:
            raise ParameterDomainError(f"s0 must be > 0, got {self.s0!r}")
        if not self.strike > 0.0:
            raise ParameterDomainError(f"strike must be > 0, got {self.strike!r}")
        if not self.maturity > 0.0:
            raise ParameterDomainError(f"maturity must be > 0, got {self.maturity!r}")
        if not self.rate >= 0.0:
            raise ParameterDomainError(f"rate must be >= 0, got {self.rate!r}")
        for name in ("s0", "strike", "rate", "maturity"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterDomainError(f"{name} must be finite")


def derive_feller_params(p: CevParams) -> FellerParams:
    """Return ``(a, b, d) = (2 + 1/alpha, 2 alpha mu, a/b)``."""
    if not isinstance(p, CevParams):
        raise TypeError("expected CevParams")
    a = 2.0 + 1.0 / p.alpha
    b = 2.0 * p.alpha * p.mu
    return FellerParams(a=a, b=b, d=a / b)


def _scale(p: CevParams) -> float:
    return p.sigma * p.sigma * p.alpha * p.alpha


def stock_to_feller(S, p: CevParams):
    """Map a stock price to the Feller coordinate ``x = S**(-2 alpha) / (sigma alpha)**2``.

    Accepts scalars or arrays; returns the same kind.
    """
    S_arr = np.asarray(S, dtype=float)
    if np.any(~(S_arr > 0.0)):
        raise ParameterDomainError("stock price must be > 0")
    x = np.power(S_arr, -2.0 * p.alpha) / _scale(p)
    return float(x) if x.ndim == 0 else x


def feller_to_stock(x, p: CevParams):
    """Inverse of :func:`stock_to_feller`: ``S = (sigma**2 alpha**2 x)**(-1/(2 alpha))``."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(~(x_arr > 0.0)):
        raise ParameterDomainError("Feller coordinate must be > 0")
    S = np.power(_scale(p) * x_arr, -0.5 / p.alpha)
    return float(S) if S.ndim == 0 else S
