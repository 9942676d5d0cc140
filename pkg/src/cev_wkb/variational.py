"""Van Vleck-Morette determinant from the linearized Hamiltonian flow.

Along a fixed classical path the variations ``(xi, eta) = (dx, dp)`` obey

    xi'  = (4p + b) xi + 4x eta
    eta' = -(4p + b) eta

and ``J`` is the ``(1, 2)`` entry of the fundamental matrix at ``tau = T``.
This route never touches the closed form of ``J`` and serves as its oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .classical import EndpointConstants, path_momentum, path_position
from .errors import NumericConvergenceError, ParameterDomainError


@dataclass(frozen=True)
class VariationalState:
    xi: float
    eta: float


def _rhs(ec):
    b = ec.b

    def f(tau, y):
        x = path_position(tau, ec)
        p = path_momentum(tau, ec)
        g = 4.0 * p + b
        # y = [Phi11, Phi12, Phi21, Phi22] row-major
        return [g * y[0] + 4.0 * x * y[2],
                g * y[1] + 4.0 * x * y[3],
                -g * y[2],
                -g * y[3]]

    return f


def fundamental_matrix(ec: EndpointConstants, rtol: float = 1e-12) -> np.ndarray:
    """Integrate the variational system from the identity to ``tau = T``.

    Uses an adaptive 8(5,3) Dormand-Prince scheme with ``atol = rtol * scale``
    where ``scale`` is the size of the ``(1, 2)`` entry after one unit step
    (``4 x_T``-ish), so position-like and dimensionless entries share a tolerance.
    """
    if not 1e-14 <= rtol <= 1e-6:
        raise ParameterDomainError(f"rtol must lie in [1e-14, 1e-6], got {rtol!r}")
    T = ec.maturity
    if T == 0.0:
        return np.eye(2)
    x0 = abs(path_position(0.0, ec))
    atol = np.array([rtol, rtol * x0 * T, rtol, rtol]) * 1e-3
    sol = solve_ivp(_rhs(ec), (0.0, T), [1.0, 0.0, 0.0, 1.0], method="DOP853",
                    rtol=rtol, atol=atol)
    if not sol.success:
        raise NumericConvergenceError(f"variational integration failed: {sol.message}")
    return sol.y[:, -1].reshape(2, 2)


def vvm_via_variational(ec: EndpointConstants, rtol: float = 1e-12) -> float:
    """``J`` as the coefficient of ``eta0`` in ``xi(T)``."""
    return float(fundamental_matrix(ec, rtol)[0, 1])


def variational_solution_closed(tau, xi0: float, eta0: float, ec: EndpointConstants) -> VariationalState:
    """Closed-form variational solution by variation of constants.

    ``eta = A1 e^{b tau} / u**2`` with ``u = 2 D2 e^{b tau} + D1 - d`` and

        xi = [(2b A2 (d-D1)**2 D2**2 - A1 D1) e^{-b tau} + 8b A2 D2**4 e^{b tau}
              - 8b A2 (d-D1) D2**3 - 2 A1 D2] / (2 b D2**2).

    The constants are ``A1 = u0**2 eta0`` and
    ``A2 = (2 D2 + D1) / (2 b D2**2) eta0 + xi0 / u0**2``; the ``xi0``
    coefficient follows from ``xi(0) = xi0``.
    """
    b, d, D1, D2 = ec.b, ec.d, ec.d1, ec.d2
    tau = np.asarray(tau, dtype=float)
    e = np.exp(b * tau)
    u0 = 2.0 * D2 + D1 - d
    u = 2.0 * D2 * e + D1 - d
    A1 = u0 * u0 * eta0
    A2 = (2.0 * D2 + D1) / (2.0 * b * D2 * D2) * eta0 + xi0 / (u0 * u0)
    eta = A1 * e / (u * u)
    xi = ((2.0 * b * A2 * (d - D1) ** 2 * D2**2 - A1 * D1) / e
          + 8.0 * b * A2 * D2**4 * e
          - 8.0 * b * A2 * (d - D1) * D2**3
          - 2.0 * A1 * D2) / (2.0 * b * D2 * D2)
    if xi.ndim == 0:
        return VariationalState(xi=float(xi), eta=float(eta))
    return VariationalState(xi=xi, eta=eta)


def eta_growth_closed(ec: EndpointConstants) -> float:
    """``eta(T) / eta0 = e^{bT} u0**2 / uT**2``."""
    e = np.exp(ec.b * ec.maturity)
    u0 = 2.0 * ec.d2 + ec.d1 - ec.d
    uT = 2.0 * ec.d2 * e + ec.d1 - ec.d
    return float(e * u0 * u0 / (uT * uT))
