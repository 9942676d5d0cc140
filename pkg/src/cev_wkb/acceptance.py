"""Exit criteria of the package as runnable checks.

Each ``criterion_*`` function returns a :class:`Criterion` holding the
measured quantity next to its threshold.  The pytest suite and the
``verify --level full`` command both run them.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp

from . import classical as cl
from .black_scholes import bs_call_closed, bs_call_quadrature
from .core import CevParams, MarketSpec, stock_to_feller
from .errors import KernelDomainError
from .kernel import kernel_mass
from .montecarlo import McConfig, mc_call_price, mc_convergence_curve
from .pricing import cev_call_price
from .quadrature import integrate
from .sweep import REFERENCE_CEV, REFERENCE_MARKET, SweepSpec, run_sweep
from .variational import vvm_via_variational

ACCEPTANCE_SEED = 20240607


@dataclass
class Criterion:
    number: int
    title: str
    passed: bool
    measured: dict
    elapsed: float = 0.0
    notes: list = field(default_factory=list)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        shown = ", ".join(f"{k}={_short(v)}" for k, v in self.measured.items())
        return f"[{status}] criterion {self.number}: {self.title} ({shown}; {self.elapsed:.1f}s)"


def _short(v):
    if isinstance(v, float):
        return f"{v:.3e}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_short(u) for u in v) + "]"
    return str(v)


@dataclass(frozen=True)
class PathConfig:
    params: CevParams
    x: float
    x_T: float
    T: float
    constants: cl.EndpointConstants


def random_path_configs(n: int = 200, seed: int = ACCEPTANCE_SEED, max_tries: int = 100_000):
    """Random non-degenerate classical paths.

    ``alpha ~ U[-1, -0.1]``, ``mu ~ U[0.01, 0.05]``, ``sigma ~ U[0.1, 0.5]``,
    ``T ~ U(0, 2]``, ``S0 ~ U[50, 150]``, and the endpoint ``S_T`` drawn
    within about two local standard deviations of ``S0 e^{mu T}``, where the
    kernel carries its mass.  Draws whose closed forms are undefined are
    rejected; the rejection count is returned alongside.
    """
    rng = np.random.default_rng(seed)
    out, rejected, tries = [], 0, 0
    while len(out) < n:
        tries += 1
        if tries > max_tries:
            raise RuntimeError("could not draw enough non-degenerate configurations")
        alpha = rng.uniform(-1.0, -0.1)
        p = CevParams(mu=rng.uniform(0.01, 0.05), sigma=rng.uniform(0.1, 0.5), alpha=alpha)
        T = 2.0 * (1.0 - rng.uniform())
        s0 = rng.uniform(50.0, 150.0)
        local = p.sigma * s0**alpha * math.sqrt(T)
        s_T = s0 * math.exp(p.mu * T + local * float(np.clip(rng.standard_normal(), -2.5, 2.5)))
        x, x_T = stock_to_feller(s0, p), stock_to_feller(s_T, p)
        fp = p.feller
        try:
            ec = cl.constants_from_endpoints(x, x_T, fp, T)
            cl.action(ec)
            cl.vvm_determinant(ec)
            cl.path_momentum(np.linspace(0.0, T, 5), ec)
        except KernelDomainError:
            rejected += 1
            continue
        out.append(PathConfig(p, x, x_T, T, ec))
    return out, rejected


def _rel(a, b, scale=None):
    s = max(abs(a), abs(b)) if scale is None else scale
    return abs(a - b) / s if s > 0 else abs(a - b)


# ----------------------------------------------------------------------------


def criterion_1(n: int = 200, tol: float = 1e-9) -> Criterion:
    """Closed-form, phase-space and variational J agree."""
    t0 = time.perf_counter()
    configs, rejected = random_path_configs(n)
    worst_phase = worst_var = 0.0
    for c in configs:
        J = cl.vvm_determinant(c.constants)
        p_T = cl.path_momentum(0.0, c.constants)
        J_phase = cl.vvm_determinant_phase(c.x_T, p_T, c.params.feller, c.T)
        J_var = vvm_via_variational(c.constants, rtol=1e-13)
        worst_phase = max(worst_phase, _rel(J, J_phase))
        worst_var = max(worst_var, _rel(J, J_var))
    elapsed = time.perf_counter() - t0
    ok = worst_phase <= tol and worst_var <= tol and elapsed < 10.0
    return Criterion(1, "three-way Van Vleck-Morette agreement", ok,
                     {"max_rel_phase": worst_phase, "max_rel_variational": worst_var,
                      "configs": len(configs), "rejected": rejected}, elapsed)


def criterion_2(n: int = 200, tol: float = 1e-8) -> Criterion:
    """Action and exp-factor integral match quadrature along the path.

    The exp-factor integrand ``4p + b`` can change sign, so its error is
    measured relative to the integral of its absolute value.
    """
    t0 = time.perf_counter()
    configs, _ = random_path_configs(n)
    worst_s = worst_i = 0.0
    for c in configs:
        ec, b = c.constants, c.params.feller.b

        def lag(t):
            return 2.0 * cl.path_momentum(t, ec) ** 2 * cl.path_position(t, ec)

        def mixed(t):
            return 4.0 * cl.path_momentum(t, ec) + b

        s_quad = integrate(lag, 0.0, c.T, rel_tol=1e-14, n_initial=4).value
        i_quad = integrate(mixed, 0.0, c.T, rel_tol=1e-14, n_initial=4).value
        i_abs = integrate(lambda t: np.abs(mixed(t)), 0.0, c.T, rel_tol=1e-10, n_initial=4).value
        worst_s = max(worst_s, _rel(cl.action(ec), s_quad))
        worst_i = max(worst_i, _rel(cl.mixed_derivative_integral(ec), i_quad, i_abs))
    elapsed = time.perf_counter() - t0
    ok = worst_s <= tol and worst_i <= tol and elapsed < 10.0
    return Criterion(2, "action / exp-factor closed form vs quadrature", ok,
                     {"max_rel_action": worst_s, "max_rel_exp_factor": worst_i}, elapsed)


def criterion_3(n: int = 200, tol_flow: float = 1e-8, tol_h: float = 1e-9) -> Criterion:
    """Closed-form flow vs Runge-Kutta; Hamiltonian conservation."""
    t0 = time.perf_counter()
    configs, _ = random_path_configs(n)
    worst_flow = worst_h = 0.0
    for c in configs:
        fp, ec = c.params.feller, c.constants
        p_T = cl.path_momentum(0.0, ec)

        def rhs(t, y):
            return cl.hamilton_rhs(y[0], y[1], fp)

        taus = np.linspace(0.0, c.T, 21)
        sol = solve_ivp(rhs, (0.0, c.T), [c.x_T, p_T], method="DOP853", rtol=1e-13,
                        atol=[1e-13 * c.x_T, 1e-13 * abs(fp.b)], t_eval=taus)
        flow = cl.flow_from_initial(taus, c.x_T, p_T, fp)
        p_scale = np.max(np.abs(flow.p)) + 1e-3 * abs(fp.b)
        worst_flow = max(worst_flow,
                         float(np.max(np.abs(flow.x - sol.y[0]) / np.abs(flow.x))),
                         float(np.max(np.abs(flow.p - sol.y[1])) / p_scale))
        xs, ps = cl.path_position(taus, ec), cl.path_momentum(taus, ec)
        H = cl.hamiltonian(xs, ps, fp)
        scale = np.max(2 * np.abs(xs) * ps**2 + np.abs(fp.b * xs * ps) + np.abs(fp.a * ps))
        if scale > 0:
            worst_h = max(worst_h, float(np.max(np.abs(H - H[0])) / scale))
    elapsed = time.perf_counter() - t0
    ok = worst_flow <= tol_flow and worst_h <= tol_h and elapsed < 10.0
    return Criterion(3, "Hamiltonian flow vs RK, H conservation", ok,
                     {"max_rel_flow": worst_flow, "max_rel_H_drift": worst_h}, elapsed)


BS_SIGMAS = (0.1, 0.2, 0.3, 0.4, 0.5)
BS_MATURITIES = (0.25, 0.6875, 1.125, 1.5625, 2.0)


def criterion_4(tol: float = 1e-6) -> Criterion:
    """Black-Scholes quadrature equals the closed form on a 5x5 grid."""
    t0 = time.perf_counter()
    worst = 0.0
    for s in BS_SIGMAS:
        for T in BS_MATURITIES:
            m = MarketSpec(100.0, 110.0, 0.03, T)
            worst = max(worst, _rel(bs_call_quadrature(m, s, tol=1e-9), bs_call_closed(m, s)))
    elapsed = time.perf_counter() - t0
    return Criterion(4, "Black-Scholes exactness", worst <= tol and elapsed < 5.0,
                     {"max_rel": worst, "grid": len(BS_SIGMAS) * len(BS_MATURITIES)}, elapsed)


def criterion_5(n_paths: int = 1_000_000, tol: float = 5e-3, seed: int = ACCEPTANCE_SEED) -> Criterion:
    """Reference cell: WKB vs 1e6-path Monte Carlo."""
    t0 = time.perf_counter()
    wkb = cev_call_price(REFERENCE_MARKET, REFERENCE_CEV)
    est = mc_call_price(REFERENCE_MARKET, REFERENCE_CEV, McConfig(n_pairs=n_paths // 2, seed=seed))
    err = abs(wkb - est.mean)
    return Criterion(5, "reference cell |WKB - MC|", err <= tol,
                     {"wkb": wkb, "mc": est.mean, "mc_se": est.std_error, "abs_error": err},
                     time.perf_counter() - t0)


def criterion_6(n_paths: int = 100_000, seed: int = ACCEPTANCE_SEED) -> Criterion:
    """Trends of |WKB - MC| along alpha and T at desk-scale path counts."""
    t0 = time.perf_counter()
    mc = McConfig(n_pairs=n_paths // 2, seed=seed)
    a_rows = run_sweep(SweepSpec("alpha", (-0.9, -0.7, -0.5, -0.3)), mc)
    t_rows = run_sweep(SweepSpec("maturity", (0.5, 1.0, 1.5)), mc)
    a_err = [r.abs_error for r in a_rows]
    t_err = [r.abs_error for r in t_rows]
    checks = {
        "alpha_monotone": all(u < v for u, v in zip(a_err, a_err[1:])),
        "maturity_monotone": all(u < v for u, v in zip(t_err, t_err[1:])),
        "alpha_-0.3_above_5e-2": a_err[-1] > 5e-2,
        "alpha_-0.9_below_1e-3": a_err[0] < 1e-3,
    }
    crit = Criterion(6, "sweep error trends at 1e5 paths", all(checks.values()),
                     {"alpha_abs_errors": a_err, "maturity_abs_errors": t_err,
                      "alpha_mc_se": [r.mc_std_error for r in a_rows], **checks},
                     time.perf_counter() - t0)
    crit.notes = [k for k, v in checks.items() if not v]
    return crit


def criterion_7(n_paths: int = 1_000_000, tol: float = 3e-2, seed: int = ACCEPTANCE_SEED) -> Criterion:
    """Convergence of the running MC estimate at sigma=0.3, alpha=-0.4, T=2."""
    t0 = time.perf_counter()
    m = replace(REFERENCE_MARKET, maturity=2.0)
    p = CevParams(mu=0.03, sigma=0.3, alpha=-0.4)
    wkb = cev_call_price(m, p)
    checkpoints = np.unique(np.round(np.logspace(3, math.log10(n_paths), 31)).astype(int))
    curve = mc_convergence_curve(m, p, McConfig(n_pairs=n_paths // 2, seed=seed), checkpoints)
    n = np.array([r[0] for r in curve], dtype=float)
    se = np.array([r[2] for r in curve])
    last_decade = n >= n[-1] / 10.0
    slope = float(np.polyfit(np.log(n[last_decade]), np.log(se[last_decade]), 1)[0])
    rel_dev = abs(curve[-1][1] - wkb) / wkb
    ok = rel_dev < tol and -0.6 <= slope <= -0.4
    return Criterion(7, "MC convergence to WKB", ok,
                     {"wkb": wkb, "mc": curve[-1][1], "rel_deviation": rel_dev, "se_slope": slope},
                     time.perf_counter() - t0)


def criterion_8() -> Criterion:
    """Small-T kernel normalization and the small-T behaviour of J."""
    t0 = time.perf_counter()
    p = REFERENCE_CEV
    fp = p.feller
    x = stock_to_feller(REFERENCE_MARKET.s0, p)
    mass = kernel_mass(x, fp, 0.01)
    # J through the phase point of the kernel's typical path at the reference.
    x_T = stock_to_feller(104.0, p)
    p_T = cl.path_momentum(0.0, cl.constants_from_endpoints(x, x_T, fp, 1.0))
    j0 = cl.vvm_determinant_phase(x_T, p_T, fp, 0.0)
    ec0 = cl.endpoint_constants_from_phase(x_T, p_T, fp, 0.0)
    j0_endpoint = float(cl.vvm_arrays(ec0.d1, ec0.d2, fp.b, fp.d, 0.0))
    h = 1e-6
    slope = (cl.vvm_determinant_phase(x_T, p_T, fp, h) - j0) / h
    rel_slope = abs(slope - 4.0 * x_T) / (4.0 * x_T)
    ok = 0.98 <= mass <= 1.02 and j0 == 0.0 and j0_endpoint == 0.0 and rel_slope <= 1e-5
    return Criterion(8, "kernel sanity (mass, J(0), dJ/dT)", ok and time.perf_counter() - t0 < 5.0,
                     {"mass_T0.01": mass, "J0": j0, "J0_endpoint": j0_endpoint,
                      "rel_err_dJdT": rel_slope}, time.perf_counter() - t0)


FAST = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_8)
SLOW = (criterion_5, criterion_6, criterion_7)
ALL = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
       criterion_7, criterion_8)
