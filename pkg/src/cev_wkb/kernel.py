"""Semiclassical (WKB) heat kernel of the reduced CEV generator.

    K(x, 0 | x_T, T) = (2 pi J)**(-1/2) * exp(I / 2) * exp(-S)

with ``S`` the action of the classical path, ``I`` the time integral of
``d2H/dx dp`` and ``J`` the Van Vleck-Morette determinant.  The product is
formed in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import classical as cl
from .classical import EndpointConstants
from .core import FellerParams
from .errors import ParameterDomainError
from .quadrature import integrate_half_line

_LOG_2PI = math.log(2.0 * math.pi)

# Fault-injection hook for the verification harness: -1 flips the sign of the
# exp-factor in the assembled value while leaving the reported ingredients intact.
_EXP_FACTOR_SIGN = 1.0

# Status codes returned by :func:`log_kernel_arrays`.
OK, DEGENERATE, LOG_DOMAIN, NONPOSITIVE_J = 0, 1, 2, 3


@dataclass(frozen=True)
class KernelEval:
    """Kernel value together with the ingredients it was assembled from.

    ``log_value`` is the primary quantity; ``value`` underflows to 0.0 once
    ``log_value`` drops below about -745.
    """

    value: float
    action: float
    exp_factor_integral: float
    vvm: float
    constants: EndpointConstants

    @property
    def log_value(self) -> float:
        return -0.5 * (_LOG_2PI + math.log(self.vvm)) + 0.5 * self.exp_factor_integral - self.action

    def reassembled(self) -> float:
        """Kernel value rebuilt from the stored decomposition."""
        return math.exp(self.log_value)


def log_kernel_arrays(x, x_T, b: float, d: float, T: float):
    """Vectorized ``log K`` plus a per-node status code; never raises."""
    d1, d2 = cl.endpoint_constants_arrays(x, x_T, b, d, T)
    scale = np.maximum(np.maximum(np.abs(x), np.abs(x_T)), 1.0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        lr, _ = cl.log_ratio_arrays(d1, d2, b, d, T)
        S = cl.action_arrays(d1, d2, b, d, T, lr)
        I = cl.mixed_integral_arrays(b, T, lr)
        J = cl.vvm_arrays(d1, d2, b, d, T)
        logk = -0.5 * (_LOG_2PI + np.log(J)) + _EXP_FACTOR_SIGN * 0.5 * I - S
    status = np.zeros(np.shape(logk), dtype=np.int8)
    status[~(J > 0)] = NONPOSITIVE_J
    status[~np.isfinite(lr)] = LOG_DOMAIN
    status[cl.is_degenerate(d2, scale)] = DEGENERATE
    return logk, status


def wkb_kernel(x: float, x_T: float, fp: FellerParams, T: float) -> KernelEval:
    """Evaluate the WKB kernel between ``x`` (tau=T) and ``x_T`` (tau=0).

    Raises
    ------
    DegeneratePathError, LogDomainError, NonPositiveJError
        With the offending ``(x, x_T, T)`` attached as ``.point``.
    """
    if not x > 0.0 or not x_T > 0.0 or not T > 0.0:
        raise ParameterDomainError(f"x, x_T, T must be > 0, got {(x, x_T, T)!r}")
    ec = cl.constants_from_endpoints(x, x_T, fp, T)
    S = cl.action(ec)
    I = cl.mixed_derivative_integral(ec)
    J = cl.vvm_determinant(ec)
    log_value = -0.5 * (_LOG_2PI + math.log(J)) + _EXP_FACTOR_SIGN * 0.5 * I - S
    return KernelEval(value=math.exp(log_value), action=S, exp_factor_integral=I, vvm=J, constants=ec)


def kernel_closed_form(x: float, x_T: float, fp: FellerParams, T: float, *, printed: bool = False) -> float:
    """Fully simplified one-line kernel, used only as a cross-check.

    ``ratio**(1 - bd/2) * exp(bT(db - 1)/2 + b/(8 D2) (D1**2 - c**2)(e^{-bT} - 1)) / sqrt(2 pi J)``

    with ``c = d``.  ``printed=True`` uses ``c = b`` instead, reproducing a
    known misprint of this formula so the discrepancy can be measured.
    """
    b, d = fp.b, fp.d
    ec = cl.constants_from_endpoints(x, x_T, fp, T)
    q = math.exp(b * T)
    ratio = (2.0 * ec.d2 * q + ec.d1 - d) / (2.0 * ec.d2 + ec.d1 - d)
    c = b if printed else d
    J_expanded = float(cl.vvm_expanded(ec.d1, ec.d2, b, d, T))
    num = ratio ** (1.0 - 0.5 * b * d) * math.exp(
        0.5 * b * T * (d * b - 1.0) + b / (8.0 * ec.d2) * (ec.d1**2 - c * c) * math.expm1(-b * T)
    )
    return num / math.sqrt(2.0 * math.pi * J_expanded)


def kernel_mass(x: float, fp: FellerParams, T: float, rel_tol: float = 1e-10) -> float:
    """``integral K(x, 0 | x_T, T) dx_T`` over ``x_T > 0``.

    Integrates outward from the zero-momentum endpoint
    ``d + (x - d) e^{-bT}`` in both directions.  Isolated degenerate nodes are
    nudged as in the pricer.
    """
    from .pricing import kernel_values  # local import: pricing depends on this module

    centre = fp.d + (x - fp.d) * math.exp(-fp.b * T)
    if not centre > 0.0:
        centre = x
    width = math.sqrt(2.0 * max(centre, x) * T)

    def f(xt):
        return kernel_values(x, xt, fp, T)

    up = integrate_half_line(f, centre, 20.0 * width, 0.25 * width, rel_tol=rel_tol)
    down = integrate_half_line(f, centre, 20.0 * width, 0.25 * width, direction=-1,
                               rel_tol=rel_tol, boundary=0.0)
    return up.value + down.value

