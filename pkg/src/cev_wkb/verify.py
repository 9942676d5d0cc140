"""Invariant suites of every module, run as one pass/fail report.

``fast`` uses reduced grids and finishes well under a minute; ``full`` runs
the complete grids and appends the Monte Carlo cross-checks.
"""

from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass

import numpy as np

from . import acceptance as acc
from . import classical as cl
from . import kernel as kn
from .black_scholes import BsParams, bs_call_closed, bs_call_quadrature, bs_propagator
from .errors import CevWkbError
from .core import CevParams, MarketSpec, derive_feller_params, stock_to_feller, feller_to_stock
from .montecarlo import McConfig, mc_call_price
from .pricing import QuadConfig, cev_call_price, integration_lower_bound
from .quadrature import integrate_half_line
from .sweep import REFERENCE_CEV, REFERENCE_MARKET
from .variational import fundamental_matrix, variational_solution_closed

LEVELS = ("fast", "full")


@dataclass(frozen=True)
class CheckResult:
    module: str
    name: str
    passed: bool
    residual: float
    tolerance: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.module}.{self.name}: residual={self.residual:.3e} tol={self.tolerance:.1e}"


@dataclass(frozen=True)
class VerifyReport:
    level: str
    results: tuple

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def failures(self):
        return [r for r in self.results if not r.passed]

    def format(self) -> str:
        lines = [r.line() for r in self.results]
        n_bad = len(self.failures())
        lines.append(f"{len(self.results) - n_bad}/{len(self.results)} checks passed ({self.level})")
        return "\n".join(lines)


@contextlib.contextmanager
def exp_factor_sign_fault():
    """Test hook: assemble the kernel with the exp-factor sign flipped."""
    old = kn._EXP_FACTOR_SIGN
    kn._EXP_FACTOR_SIGN = -old
    try:
        yield
    finally:
        kn._EXP_FACTOR_SIGN = old


def _check(module, name, residual, tol):
    residual = float(residual)
    return CheckResult(module, name, bool(residual <= tol and math.isfinite(residual)), residual, tol)


PARAM_GRID = [CevParams(mu, s, a) for mu in (0.01, 0.03, 0.05) for s in (0.1, 0.3, 0.5)
              for a in (-1.0, -0.75, -0.5, -0.25)]


def _core_checks():
    out = []
    eps = np.finfo(float).eps
    res = max(abs(fp.a - fp.b * fp.d) / max(abs(fp.a), 1.0)
              for fp in map(derive_feller_params, PARAM_GRID))
    out.append(_check("core_types", "feller_consistency", res, 2 * eps))
    S = np.logspace(-2, 4, 1000)
    res = max(float(np.max(np.abs(feller_to_stock(stock_to_feller(S, p), p) / S - 1.0)))
              for p in PARAM_GRID)
    out.append(_check("core_types", "roundtrip", res, 1e-12))
    rng = np.random.default_rng(1)
    res = 0.0
    for _ in range(50):
        p = CevParams(0.03, rng.uniform(0.05, 1.0), -0.5)
        E = rng.uniform(1.0, 500.0)
        res = max(res, abs(integration_lower_bound(E, p) - E / (p.sigma**2 * 0.25)) / E)
    out.append(_check("core_types", "strike_bound_alpha_half", res, 1e-14))
    return out


def _bs_checks(full):
    out = []
    worst = 0.0
    for T in (0.01, 0.5, 1.0, 2.0):
        p = BsParams(0.3, 0.03)
        w = p.sigma * math.sqrt(T)
        c = p.mu_eff * T

        def f(xt):
            return bs_propagator(0.0, xt, T, p)

        mass = (integrate_half_line(f, c, 12 * w, w / 2, rel_tol=1e-13).value
                + integrate_half_line(f, c, 12 * w, w / 2, direction=-1, rel_tol=1e-13).value)
        worst = max(worst, abs(mass / math.exp(-p.rate * T) - 1.0))
    out.append(_check("bs_kernel", "kernel_mass", worst, 1e-10))
    sig = acc.BS_SIGMAS if full else acc.BS_SIGMAS[::2]
    mats = acc.BS_MATURITIES if full else acc.BS_MATURITIES[::2]
    worst = 0.0
    for s in sig:
        for T in mats:
            m = MarketSpec(100.0, 110.0, 0.03, T)
            worst = max(worst, abs(bs_call_quadrature(m, s, 1e-9) / bs_call_closed(m, s) - 1.0))
    out.append(_check("bs_kernel", "quadrature_vs_closed", worst, 1e-6))
    return out


def _classical_checks(configs):
    out = []
    recon = ham = fd = 0.0
    for c in configs:
        ec, fp = c.constants, c.params.feller
        recon = max(recon, abs(cl.path_position(0.0, ec) / c.x_T - 1.0),
                    abs(cl.path_position(c.T, ec) / c.x - 1.0))
        taus = np.linspace(0.0, c.T, 22)[1:-1]
        h = 1e-6 * c.T
        xs, ps = cl.path_position(taus, ec), cl.path_momentum(taus, ec)
        xdot = (cl.path_position(taus + h, ec) - cl.path_position(taus - h, ec)) / (2 * h)
        pdot = (cl.path_momentum(taus + h, ec) - cl.path_momentum(taus - h, ec)) / (2 * h)
        fx, fpp = cl.hamilton_rhs(xs, ps, fp)
        xscale = np.abs(4 * xs * ps) + np.abs(fp.b * xs) + abs(fp.a)
        pscale = 2 * ps**2 + np.abs(fp.b * ps) + 1e-3 * fp.b**2
        fd = max(fd, float(np.max(np.abs(xdot - fx) / xscale)), float(np.max(np.abs(pdot - fpp) / pscale)))
        H = cl.hamiltonian(xs, ps, fp)
        hs = np.max(2 * np.abs(xs) * ps**2 + np.abs(fp.b * xs * ps) + np.abs(fp.a * ps))
        if hs > 0:
            ham = max(ham, float(np.max(np.abs(H - H[0])) / hs))
    out.append(_check("cev_classical", "endpoint_reconstruction", recon, 1e-9))
    out.append(_check("cev_classical", "hamilton_residuals", fd, 1e-6))
    out.append(_check("cev_classical", "hamiltonian_conservation", ham, 1e-9))
    return out


def _variational_checks(configs):
    wr = agree = 0.0
    for c in configs:
        phi = fundamental_matrix(c.constants, 1e-12)
        wr = max(wr, abs(np.linalg.det(phi) - 1.0))
        col_eta = variational_solution_closed(c.T, 0.0, 1.0, c.constants)
        col_xi = variational_solution_closed(c.T, 1.0, 0.0, c.constants)
        closed = np.array([[col_xi.xi, col_eta.xi], [col_xi.eta, col_eta.eta]])
        agree = max(agree, float(np.max(np.abs(closed - phi) / np.maximum(np.abs(phi), 1.0))))
    return [_check("cev_variational", "wronskian", wr, 1e-9),
            _check("cev_variational", "closed_vs_numeric", agree, 1e-9)]


def _kernel_checks(configs, full):
    reassembly = closed = 0.0
    for c in configs:
        fp = c.params.feller
        ev = kn.wkb_kernel(c.x, c.x_T, fp, c.T)
        reassembly = max(reassembly, abs(ev.value - ev.reassembled()) / ev.value)
        closed = max(closed, abs(kn.kernel_closed_form(c.x, c.x_T, fp, c.T) / ev.value - 1.0))
    p = REFERENCE_CEV
    x = stock_to_feller(REFERENCE_MARKET.s0, p)
    mass = kn.kernel_mass(x, p.feller, 0.01)
    # positivity is checked in log space: far grid corners underflow exp()
    bad_nodes = 0
    xs = np.linspace(0.1 * x, 10 * x, 50 if full else 12)
    for T in (0.25, 1.0, 2.0):
        for xx in xs:
            for xt in xs:
                try:
                    ok = math.isfinite(kn.wkb_kernel(float(xx), float(xt), p.feller, T).log_value)
                except CevWkbError:
                    ok = False
                bad_nodes += not ok
    return [_check("cev_kernel", "reassembly", reassembly, 4 * np.finfo(float).eps),
            _check("cev_kernel", "closed_form_crosscheck", closed, 1e-12),
            _check("cev_kernel", "small_T_normalization", abs(mass - 1.0), 2e-2),
            _check("cev_kernel", "positivity_grid_failures", bad_nodes, 0.0)]


def _pricing_checks(full):
    out = []
    strikes = np.linspace(60.0, 160.0, 21 if full else 6)
    worst_bound = 0.0
    monotone = 0.0
    for p in (REFERENCE_CEV, CevParams(0.03, 0.3, -0.8), CevParams(0.03, 0.3, -0.3)):
        prices = [cev_call_price(MarketSpec(100.0, E, 0.03, 1.0), p) for E in strikes]
        worst_bound = max(worst_bound, max(max(-v, v - 100.0, 0.0) for v in prices))
        monotone = max(monotone, max(max(b - a, 0.0) for a, b in zip(prices, prices[1:])))
    out.append(_check("pricing", "price_bounds", worst_bound, 0.0))
    out.append(_check("pricing", "monotone_in_strike", monotone, 0.0))
    worst = 0.0
    for p in (REFERENCE_CEV, CevParams(0.03, 0.3, -0.8), CevParams(0.03, 0.3, -0.3)):
        a = cev_call_price(REFERENCE_MARKET, p, parameterization="bd")
        b = cev_call_price(REFERENCE_MARKET, p, parameterization="sigma_alpha")
        worst = max(worst, abs(a - b) / abs(a))
    out.append(_check("pricing", "parameterization_agreement", worst, 1e-12))
    p1 = cev_call_price(REFERENCE_MARKET, REFERENCE_CEV, QuadConfig(rel_tol=1e-8))
    p2 = cev_call_price(REFERENCE_MARKET, REFERENCE_CEV, QuadConfig(rel_tol=5e-9))
    out.append(_check("pricing", "tolerance_halving", abs(p1 - p2) / p1, 1e-8))
    return out


def _mc_checks():
    out = []
    c = McConfig(n_pairs=5000, seed=7)
    a = mc_call_price(REFERENCE_MARKET, REFERENCE_CEV, c)
    b = mc_call_price(REFERENCE_MARKET, REFERENCE_CEV, c)
    out.append(_check("mc_oracle", "reproducibility", 0.0 if a == b else 1.0, 0.0))
    coarse = mc_call_price(REFERENCE_MARKET, REFERENCE_CEV, McConfig(n_pairs=100_000, seed=11))
    fine = mc_call_price(REFERENCE_MARKET, REFERENCE_CEV,
                         McConfig(n_pairs=100_000, steps_per_year=2000, seed=11))
    z = abs(coarse.mean - fine.mean) / math.hypot(coarse.std_error, fine.std_error)
    out.append(_check("mc_oracle", "discretization_bias_sigmas", z, 3.0))
    return out


def run_verify(level: str = "fast") -> VerifyReport:
    """Run every module's invariant suite at the given level."""
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}, got {level!r}")
    full = level == "full"
    configs, _ = acc.random_path_configs(200 if full else 25)
    results = []
    results += _core_checks()
    results += _bs_checks(full)
    results += _classical_checks(configs)
    j_crit = acc.criterion_1(n=200 if full else 20)
    results.append(CheckResult("cev_classical", "three_way_J",
                               j_crit.passed, max(j_crit.measured["max_rel_phase"],
                                                  j_crit.measured["max_rel_variational"]), 1e-9))
    results += _variational_checks(configs[:50] if full else configs[:10])
    results += _kernel_checks(configs, full)
    results += _pricing_checks(full)
    if full:
        results += _mc_checks()
        for crit in acc.ALL:
            r = crit()
            results.append(CheckResult("acceptance", f"criterion_{r.number}", r.passed,
                                       0.0 if r.passed else 1.0, 0.0))
    return VerifyReport(level, tuple(results))
