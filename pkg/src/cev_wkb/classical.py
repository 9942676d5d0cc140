"""Closed-form classical mechanics of the reduced CEV Hamiltonian.

Hamiltonian ``H = 2 x p**2 + (b x - a) p`` with flow

    x' = 4 x p + b x - a,      p' = -2 p**2 - b p,

running in time-to-maturity ``tau`` from ``x(0) = x_T`` to ``x(T) = x``.  A
path is labelled by the endpoint constants ``D1``, ``D2``:

    x(tau) = ((D1 + 2 D2 e^{b tau})**2 - d**2) / (4 D2 e^{b tau}).

Every public function accepts scalars; the ``*_arrays`` helpers are
vectorized and never raise, leaving domain checks to the caller.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FellerParams
from .errors import (
    DegeneratePathError,
    EndpointReconstructionError,
    LogDomainError,
    MomentumPoleError,
    NonPositiveJError,
    ParameterDomainError,
)

DEGENERACY_THRESHOLD = 1e-10
POLE_THRESHOLD = 1e-12
RECONSTRUCTION_RTOL = 1e-9


@dataclass(frozen=True)
class EndpointConstants:
    """Integration constants of one classical path.

    ``x`` and ``x_T`` are the configuration endpoints when the constants were
    built from them, else ``None``.
    """

    d1: float
    d2: float
    d: float
    b: float
    maturity: float
    x: float | None = None
    x_T: float | None = None

    @property
    def point(self):
        return (self.x, self.x_T, self.maturity)

    @property
    def scale(self) -> float:
        return max(abs(self.x or 0.0), abs(self.x_T or 0.0), 1.0)


@dataclass(frozen=True)
class PhaseState:
    x: float
    p: float


@dataclass(frozen=True)
class AuxConstants:
    c1: float
    c2: float


# ----------------------------------------------------------------------------
# vectorized building blocks


def endpoint_constants_arrays(x, x_T, b, d, T):
    """``(D1, D2)`` for endpoints ``x`` (at ``tau=T``) and ``x_T`` (at ``tau=0``).

    Positive square-root branch.  Both quotients are rationalized so that no
    difference of nearly equal large terms is formed when ``bT`` is small:

        D2 = ((xq - x_T)**2 - d**2 m**2) / (m**2 (xq + x_T + R))
        D1 = ((q+1)**2 d**2 m**2 + 4q (xq - x_T)(x_T q - x)) / (m**2 ((q+1) R + 2q (x + x_T)))

    with ``q = e^{bT}``, ``m = q - 1`` and ``R = sqrt(d**2 m**2 + 4 x x_T q)``.
    """
    x = np.asarray(x, dtype=float)
    x_T = np.asarray(x_T, dtype=float)
    q = np.exp(b * T)
    m = np.expm1(b * T)
    dm = d * m
    R = np.sqrt(dm * dm + 4.0 * x * x_T * q)
    gap = (x - x_T) + x * m          # x q - x_T
    gap_rev = (x_T - x) + x_T * m    # x_T q - x
    m2 = m * m
    d2 = (gap - dm) * (gap + dm) / (m2 * (x * q + x_T + R))
    d1 = ((q + 1.0) ** 2 * dm * dm + 4.0 * q * gap * gap_rev) / (
        m2 * ((q + 1.0) * R + 2.0 * q * (x + x_T))
    )
    return d1, d2


def log_ratio_arrays(d1, d2, b, d, T):
    """``log((2 D2 e^{bT} + D1 - d) / (2 D2 + D1 - d))`` and the raw ratio argument.

    Returns ``(log_ratio, u0)``; ``log_ratio`` is NaN where the ratio is not
    positive.  The numerator minus the denominator is exactly ``2 D2 (e^{bT}-1)``.
    """
    u0 = 2.0 * d2 + d1 - d
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = 2.0 * d2 * np.expm1(b * T) / u0
        lr = np.where(rel > -1.0, np.log1p(np.where(rel > -1.0, rel, 0.0)), np.nan)
    return lr, u0


def action_arrays(d1, d2, b, d, T, lr):
    return (0.5 * b * d * lr
            + b / (8.0 * d2) * (d - d1) * (d + d1) * np.expm1(-b * T)
            - 0.5 * d * b * b * T)


def mixed_integral_arrays(b, T, lr):
    return -b * T + 2.0 * lr


def vvm_arrays(d1, d2, b, d, T):
    """``J = (e^{bT}-1) / (b D2 e^{bT}) * ((2 D2 e^{bT} + D1)(2 D2 + D1) - d**2)``.

    Algebraically identical to the expanded three-exponential expression; the
    factored form keeps the ``T -> 0`` cancellation exact.
    """
    q = np.exp(b * T)
    m = np.expm1(b * T)
    return m / (b * d2 * q) * ((2.0 * d2 * q + d1) * (2.0 * d2 + d1) - d * d)


def vvm_expanded(d1, d2, b, d, T):
    """The three-exponential form of J, kept literally for cross-checks."""
    q = np.exp(b * T)
    return (d1 * d1 - 4.0 * d2 * d2 - d * d + (4.0 * d2 * d2 + 2.0 * d1 * d2) * q
            + (d * d - 2.0 * d1 * d2 - d1 * d1) / q) / (b * d2)


def is_degenerate(d2, scale):
    return np.abs(d2) < DEGENERACY_THRESHOLD * scale


# ----------------------------------------------------------------------------
# endpoint constants


def _check_positive(name, value):
    if not value > 0.0:
        raise ParameterDomainError(f"{name} must be > 0, got {value!r}")


def constants_from_endpoints(x: float, x_T: float, fp: FellerParams, T: float) -> EndpointConstants:
    """Endpoint constants of the classical path from ``x_T`` (tau=0) to ``x`` (tau=T).

    Raises
    ------
    DegeneratePathError
        If ``|D2| < 1e-10 * max(|x|, |x_T|, 1)``.
    EndpointReconstructionError
        If the path rebuilt from ``(D1, D2)`` misses an endpoint by more than
        relative 1e-9.
    """
    _check_positive("x", x)
    _check_positive("x_T", x_T)
    _check_positive("T", T)
    d1, d2 = endpoint_constants_arrays(x, x_T, fp.b, fp.d, T)
    ec = EndpointConstants(float(d1), float(d2), fp.d, fp.b, float(T), float(x), float(x_T))
    if is_degenerate(ec.d2, ec.scale):
        raise DegeneratePathError(f"D2={ec.d2:.3e} below degeneracy threshold", ec.point)
    x0 = path_position(0.0, ec)
    x1 = path_position(T, ec)
    for got, want, where in ((x0, x_T, "tau=0"), (x1, x, "tau=T")):
        if not abs(got - want) <= RECONSTRUCTION_RTOL * abs(want):
            raise EndpointReconstructionError(
                f"path misses endpoint at {where}: {got!r} vs {want!r}", ec.point
            )
    return ec


def constants_from_phase(x_T: float, p_T: float, fp: FellerParams):
    """``(D1, D2)`` of the orbit through ``(x_T, p_T)`` at tau = 0."""
    b, d = fp.b, fp.d
    d1 = -8.0 * x_T / b**2 * p_T**2 - 4.0 * (x_T - d) / b * p_T + d
    d2 = 4.0 * x_T / b**2 * p_T**2 + 2.0 * (2.0 * x_T - d) / b * p_T + x_T - d
    return d1, d2


def endpoint_constants_from_phase(x_T: float, p_T: float, fp: FellerParams, T: float) -> EndpointConstants:
    """Wrap :func:`constants_from_phase` into an :class:`EndpointConstants` over ``[0, T]``."""
    d1, d2 = constants_from_phase(x_T, p_T, fp)
    ec = EndpointConstants(float(d1), float(d2), fp.d, fp.b, float(T), None, float(x_T))
    if is_degenerate(ec.d2, ec.scale):
        raise DegeneratePathError(f"D2={ec.d2:.3e} below degeneracy threshold", ec.point)
    return ec


def aux_constants(ec: EndpointConstants) -> AuxConstants:
    """``C1 = 4 D2 / (d - D1)``, ``C2 = (d - D1)**2 / (16 D2)``."""
    gap = ec.d - ec.d1
    if gap == 0.0:
        raise MomentumPoleError("C1 undefined on the zero-momentum orbit (D1 = d)", ec.point)
    return AuxConstants(c1=4.0 * ec.d2 / gap, c2=gap * gap / (16.0 * ec.d2))


def aux_constants_from_phase(x_T: float, p_T: float, fp: FellerParams) -> AuxConstants:
    """``C1 = b/p_T + 2`` and ``C2`` written through the initial phase point.

    ``C2 = p_T**2 (x_T b + 2 p_T x_T - a) / (b**2 (b + 2 p_T))`` follows from
    ``x(0) = x_T``; the variant with ``(a - x_T) b`` in place of ``a - x_T b``
    agrees with it only when ``d = 0``.
    """
    a, b = fp.a, fp.b
    if p_T == 0.0 or b + 2.0 * p_T == 0.0:
        raise MomentumPoleError("C1/C2 undefined for p_T in {0, -b/2}")
    c1 = b / p_T + 2.0
    c2 = p_T**2 * (x_T * b + 2.0 * p_T * x_T - a) / (b**2 * (b + 2.0 * p_T))
    return AuxConstants(c1=c1, c2=c2)


# ----------------------------------------------------------------------------
# the path


def _require_nondegenerate(ec):
    if is_degenerate(ec.d2, ec.scale):
        raise DegeneratePathError(f"D2={ec.d2:.3e} below degeneracy threshold", ec.point)


def _scalar(v):
    v = np.asarray(v)
    return float(v) if v.ndim == 0 else v


def path_position(tau, ec: EndpointConstants):
    """``x(tau) = ((D1 + 2 D2 e^{b tau})**2 - d**2) / (4 D2 e^{b tau})``."""
    _require_nondegenerate(ec)
    e = np.exp(ec.b * np.asarray(tau, dtype=float))
    u = 2.0 * ec.d2 * e + ec.d1 - ec.d
    return _scalar(u * (u + 2.0 * ec.d) / (4.0 * ec.d2 * e))


def path_momentum(tau, ec: EndpointConstants):
    """``p(tau) = b (d - D1) / (4 D2 e^{b tau} + 2 D1 - 2 d)``."""
    _require_nondegenerate(ec)
    e = np.exp(ec.b * np.asarray(tau, dtype=float))
    den = 4.0 * ec.d2 * e + 2.0 * ec.d1 - 2.0 * ec.d
    scale = abs(ec.d1) + abs(ec.d2) + abs(ec.d)
    if np.any(np.abs(den) < POLE_THRESHOLD * scale):
        raise MomentumPoleError("momentum pole on the requested times", ec.point)
    return _scalar(ec.b * (ec.d - ec.d1) / den)


def hamiltonian(x, p, fp: FellerParams):
    """``H = 2 x p**2 + (b x - a) p``."""
    return 2.0 * x * p * p + (fp.b * x - fp.a) * p


def hamilton_rhs(x, p, fp: FellerParams):
    """Right-hand side ``(x', p')`` of Hamilton's equations."""
    return 4.0 * x * p + fp.b * x - fp.a, -2.0 * p * p - fp.b * p


def flow_from_initial(tau, x_T: float, p_T: float, fp: FellerParams) -> PhaseState:
    """Hamiltonian flow of ``(x_T, p_T)`` after time ``tau``.

    The position is the initial-condition form of the path, regrouped around
    ``x_T`` so that the constant terms cancel exactly:

        x = x_T + [(2p_T + b)(2 x_T p_T + x_T b - d b)(e^{b tau} - 1)
                   + (4 p_T**2 x_T - 2 p_T b d)(e^{-b tau} - 1)] / b**2
    """
    _check_positive("x_T", x_T)
    b, d = fp.b, fp.d
    tau = np.asarray(tau, dtype=float)
    em = np.expm1(b * tau)
    x = x_T + ((2.0 * p_T + b) * (2.0 * x_T * p_T + x_T * b - d * b) * em
               + (4.0 * p_T * p_T * x_T - 2.0 * p_T * b * d) * np.expm1(-b * tau)) / (b * b)
    den = b * np.exp(b * tau) + 2.0 * p_T * em   # (b + 2 p_T) e^{b tau} - 2 p_T
    if np.any(np.abs(den) < POLE_THRESHOLD * (abs(b) + abs(p_T))):
        raise MomentumPoleError(f"momentum pole for p_T={p_T!r}")
    p = b * p_T / den
    return PhaseState(x=_scalar(x), p=_scalar(p))


# ----------------------------------------------------------------------------
# action, exp-factor integral, Van Vleck-Morette determinant


def _log_ratio(ec):
    _require_nondegenerate(ec)
    lr, u0 = log_ratio_arrays(ec.d1, ec.d2, ec.b, ec.d, ec.maturity)
    if not np.isfinite(lr):
        num = 2.0 * ec.d2 * np.exp(ec.b * ec.maturity) + ec.d1 - ec.d
        raise LogDomainError(
            f"log ratio argument not positive: numerator={num!r}, denominator={float(u0)!r}",
            ec.point,
        )
    return float(lr)


def action(ec: EndpointConstants) -> float:
    """Action of the classical path, the time integral of ``L = 2 p**2 x``."""
    lr = _log_ratio(ec)
    return float(action_arrays(ec.d1, ec.d2, ec.b, ec.d, ec.maturity, lr))


def mixed_derivative_integral(ec: EndpointConstants) -> float:
    """Time integral of ``d2H/dx dp = 4p + b`` along the path."""
    lr = _log_ratio(ec)
    return float(mixed_integral_arrays(ec.b, ec.maturity, lr))


def vvm_determinant(ec: EndpointConstants) -> float:
    """Van Vleck-Morette determinant from the endpoint constants.

    Raises
    ------
    NonPositiveJError
        If ``J <= 0``; the kernel prefactor is then undefined.
    """
    _require_nondegenerate(ec)
    J = float(vvm_arrays(ec.d1, ec.d2, ec.b, ec.d, ec.maturity))
    if ec.maturity > 0.0 and not J > 0.0:
        raise NonPositiveJError(f"J={J!r} is not positive", ec.point)
    return J


def vvm_determinant_phase(x_T: float, p_T: float, fp: FellerParams, T: float) -> float:
    """``J = dx(T)/dp_T`` written through the initial phase point.

    Regrouped as ``(e^{bT}-1)/b**2 * [4 x_T b + (8 x_T p_T - 2 d b)(e^{bT}-1)e^{-bT}]``,
    equal to the three-exponential expression term by term.
    """
    b, d = fp.b, fp.d
    m = np.expm1(b * T)
    return float(m / (b * b) * (4.0 * x_T * b + (8.0 * x_T * p_T - 2.0 * d * b) * m * np.exp(-b * T)))


def vvm_determinant_phase_expanded(x_T: float, p_T: float, fp: FellerParams, T: float) -> float:
    """Literal three-exponential form of :func:`vvm_determinant_phase`."""
    b, d = fp.b, fp.d
    q = np.exp(b * T)
    return float((4 * d * b - 4 * x_T * b - 16 * x_T * p_T
                  + (4 * x_T * b + 8 * x_T * p_T - 2 * d * b) * q
                  + (8 * x_T * p_T - 2 * d * b) / q) / b**2)
