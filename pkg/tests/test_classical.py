import math

import mpmath
import numpy as np
import pytest
import sympy as sp
from hypothesis import assume, given, settings, strategies as st
from scipy import integrate as sp_integrate
from scipy.integrate import solve_ivp

from cev_wkb import (CevParams, DegeneratePathError, FellerParams, KernelDomainError, LogDomainError,
                     MomentumPoleError, ParameterDomainError, stock_to_feller)
from cev_wkb import classical as cl


def _random_feller(rng):
    return CevParams(rng.uniform(0.01, 0.05), rng.uniform(0.1, 0.5), rng.uniform(-1.0, -0.1)).feller


def test_d_zero_closed_form():
    fp = CevParams(0.03, 0.3, -0.5).feller
    x, x_T, T = 4444.0, 4700.0, 1.0
    ec = cl.constants_from_endpoints(x, x_T, fp, T)
    q = math.exp(fp.b * T)
    want = (math.sqrt(x * q) - math.sqrt(x_T)) ** 2 / (q - 1.0) ** 2
    assert ec.d2 == pytest.approx(want, rel=1e-12)


def test_d_zero_degenerate_path():
    fp = CevParams(0.03, 0.3, -0.5).feller
    x_T, T = 4444.0, 1.0
    x = x_T * math.exp(-fp.b * T)
    with pytest.raises(DegeneratePathError) as info:
        cl.constants_from_endpoints(x, x_T, fp, T)
    assert info.value.point == (x, x_T, T)


def test_mpmath_endpoint_constants(rng):
    """High-precision root of the two endpoint equations of the path."""
    mpmath.mp.dps = 50
    for _ in range(20):
        fp = _random_feller(rng)
        x, x_T = rng.uniform(10, 1e4, size=2)
        T = rng.uniform(0.05, 2.0)
        try:
            ec = cl.constants_from_endpoints(x, x_T, fp, T)
        except KernelDomainError:
            continue
        b, d = mpmath.mpf(fp.b), mpmath.mpf(fp.d)
        q = mpmath.exp(b * T)

        def eqs(D1, D2):
            return [D2 + D1 + (D1**2 - d**2) / (4 * D2) - x_T,
                    D2 * q + D1 + (D1**2 - d**2) / (4 * D2 * q) - x]

        D1, D2 = mpmath.findroot(eqs, (mpmath.mpf(ec.d1), mpmath.mpf(ec.d2)))
        scale = max(abs(float(D1)), abs(float(D2)), abs(fp.d), 1.0)
        assert abs(ec.d1 - float(D1)) <= 1e-9 * scale
        assert abs(ec.d2 - float(D2)) <= 1e-9 * scale


def test_sympy_rationalized_equals_printed():
    """The rationalized (D1, D2) are the printed radical expressions."""
    x, xT, d, q = sp.symbols("x x_T d q", positive=True)
    R = sp.sqrt(d**2 * (q - 1) ** 2 + 4 * x * xT * q)
    m = q - 1
    d2_printed = (x * q + xT - R) / m**2  # positive root of the endpoint equations
    d2_rational = ((x * q - xT) ** 2 - d**2 * m**2) / (m**2 * (x * q + xT + R))
    assert sp.simplify(sp.expand((d2_printed - d2_rational) * (x * q + xT + R) * m**2)) == 0
    d1_printed = ((q + 1) * R - 2 * q * (x + xT)) / m**2
    d1_rational = ((q + 1) ** 2 * d**2 * m**2 + 4 * q * (x * q - xT) * (xT * q - x)) / (
        m**2 * ((q + 1) * R + 2 * q * (x + xT)))
    assert sp.simplify(sp.expand((d1_printed - d1_rational) * ((q + 1) * R + 2 * q * (x + xT)) * m**2)) == 0
    # the radical D2 solves the endpoint equations together with
    # D1 = x_T - D2 - (D1**2 - d**2) / (4 D2), checked numerically in
    # test_mpmath_endpoint_constants


@settings(max_examples=100, deadline=None)
@given(alpha=st.floats(-1.0, -0.1), mu=st.floats(0.01, 0.05), sigma=st.floats(0.1, 0.5),
       x=st.floats(10.0, 1e4), x_T=st.floats(10.0, 1e4), T=st.floats(0.01, 2.0))
def test_endpoint_reconstruction(alpha, mu, sigma, x, x_T, T):
    fp = CevParams(mu, sigma, alpha).feller
    try:
        ec = cl.constants_from_endpoints(x, x_T, fp, T)
    except DegeneratePathError:
        assume(False)
    assert cl.path_position(0.0, ec) == pytest.approx(x_T, rel=1e-9)
    assert cl.path_position(T, ec) == pytest.approx(x, rel=1e-9)


def test_rejects_nonpositive_endpoints(ref_cev):
    with pytest.raises(ParameterDomainError):
        cl.constants_from_endpoints(-1.0, 10.0, ref_cev.feller, 1.0)
    with pytest.raises(ParameterDomainError):
        cl.constants_from_endpoints(1.0, 10.0, ref_cev.feller, 0.0)


def test_phase_constants_special_points(rng):
    for _ in range(10):
        fp = _random_feller(rng)
        x_T = rng.uniform(10, 1e4)
        assert cl.constants_from_phase(x_T, 0.0, fp) == (fp.d, x_T - fp.d)
        d1, d2 = cl.constants_from_phase(x_T, -fp.b / 2, fp)
        assert abs(d2) <= 1e-12 * max(x_T, abs(fp.d))
        with pytest.raises(DegeneratePathError):
            cl.endpoint_constants_from_phase(x_T, -fp.b / 2, fp, 1.0)


def test_flow_matches_path_from_phase_constants(rng):
    for _ in range(50):
        fp = _random_feller(rng)
        x_T = rng.uniform(10, 1e4)
        p_T = rng.uniform(-0.4, 0.4) * abs(fp.b)
        T = rng.uniform(0.1, 2.0)
        try:
            ec = cl.endpoint_constants_from_phase(x_T, p_T, fp, T)
        except DegeneratePathError:
            continue
        st_ = cl.flow_from_initial(T, x_T, p_T, fp)
        assert st_.x == pytest.approx(cl.path_position(T, ec), rel=1e-10)
        assert st_.p == pytest.approx(cl.path_momentum(T, ec), rel=1e-10, abs=1e-14)


def test_flow_identity_and_zero_momentum(rng):
    fp = _random_feller(rng)
    st0 = cl.flow_from_initial(0.0, 123.0, 0.004, fp)
    assert (st0.x, st0.p) == (123.0, 0.004)
    tau = np.linspace(0.0, 2.0, 9)
    flow = cl.flow_from_initial(tau, 123.0, 0.0, fp)
    np.testing.assert_array_equal(flow.p, 0.0)
    np.testing.assert_allclose(flow.x, fp.d + (123.0 - fp.d) * np.exp(fp.b * tau), rtol=1e-13)


def test_flow_matches_runge_kutta(rng):
    for _ in range(40):
        fp = _random_feller(rng)
        x_T = rng.uniform(10, 1e4)
        p_T = rng.uniform(-0.4, 0.4) * abs(fp.b)
        T = rng.uniform(0.05, 2.0)

        def rhs(t, y):
            return cl.hamilton_rhs(y[0], y[1], fp)

        sol = solve_ivp(rhs, (0.0, T), [x_T, p_T], method="DOP853", rtol=1e-13, atol=1e-14)
        flow = cl.flow_from_initial(T, x_T, p_T, fp)
        assert flow.x == pytest.approx(sol.y[0, -1], rel=1e-8)
        assert flow.p == pytest.approx(sol.y[1, -1], rel=1e-8, abs=1e-12 * abs(fp.b))


def _some_paths(rng, n=30):
    out = []
    while len(out) < n:
        p = CevParams(rng.uniform(0.01, 0.05), rng.uniform(0.1, 0.5), rng.uniform(-1.0, -0.1))
        T = rng.uniform(0.1, 2.0)
        s0 = rng.uniform(50, 150)
        sT = s0 * math.exp(rng.normal(0.0, 0.5 * p.sigma * s0**p.alpha * math.sqrt(T)))
        x, x_T = stock_to_feller(s0, p), stock_to_feller(sT, p)
        try:
            ec = cl.constants_from_endpoints(x, x_T, p.feller, T)
            cl.path_momentum(np.linspace(0, T, 50), ec)
            cl.action(ec)
        except KernelDomainError:
            continue
        out.append((p.feller, x, x_T, T, ec))
    return out


def test_hamilton_finite_differences(rng):
    for fp, x, x_T, T, ec in _some_paths(rng):
        taus = np.linspace(0.0, T, 22)[1:-1]
        h = 1e-6 * T
        xs, ps = cl.path_position(taus, ec), cl.path_momentum(taus, ec)
        xdot = (cl.path_position(taus + h, ec) - cl.path_position(taus - h, ec)) / (2 * h)
        pdot = (cl.path_momentum(taus + h, ec) - cl.path_momentum(taus - h, ec)) / (2 * h)
        xscale = np.abs(4 * xs * ps) + np.abs(fp.b * xs) + abs(fp.a)
        np.testing.assert_array_less(np.abs(xdot - (4 * xs * ps + fp.b * xs - fp.a)), 1e-6 * xscale)
        # momentum from the position equation
        p_from_x = (xdot + fp.b * fp.d - fp.b * xs) / (4 * xs)
        np.testing.assert_array_less(np.abs(p_from_x - ps), 1e-6 * (np.abs(ps) + abs(fp.b)))
        pscale = 2 * ps**2 + np.abs(fp.b * ps) + 1e-3 * fp.b**2
        np.testing.assert_array_less(np.abs(pdot + 2 * ps**2 + fp.b * ps), 1e-6 * pscale)


def test_hamiltonian_conserved(rng):
    for fp, x, x_T, T, ec in _some_paths(rng):
        taus = np.linspace(0.0, T, 41)
        xs, ps = cl.path_position(taus, ec), cl.path_momentum(taus, ec)
        H = cl.hamiltonian(xs, ps, fp)
        scale = np.max(2 * xs * ps**2 + np.abs(fp.b * xs * ps) + np.abs(fp.a * ps))
        assert np.max(np.abs(H - H[0])) <= 1e-9 * scale


def test_zero_momentum_branch():
    fp = CevParams(0.03, 0.3, -0.7).feller
    x_T, T = 500.0, 1.3
    x = fp.d + (x_T - fp.d) * math.exp(fp.b * T)   # endpoint of the p = 0 orbit
    ec = cl.constants_from_endpoints(x, x_T, fp, T)
    np.testing.assert_allclose(cl.path_momentum(np.linspace(0, T, 5), ec), 0.0, atol=1e-10 * abs(fp.b))
    assert cl.mixed_derivative_integral(ec) == pytest.approx(fp.b * T, rel=1e-6)
    assert cl.action(ec) == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(MomentumPoleError):
        cl.aux_constants(cl.EndpointConstants(fp.d, 1.0, fp.d, fp.b, T))


def test_action_d_zero_form():
    fp = CevParams(0.03, 0.3, -0.5).feller
    ec = cl.constants_from_endpoints(4444.0, 4700.0, fp, 1.0)
    want = -(fp.b * ec.d1**2 / (8 * ec.d2)) * (math.exp(-fp.b) - 1.0)
    assert cl.action(ec) == pytest.approx(want, rel=1e-12)


def test_action_and_exp_factor_vs_lagrangian_quadrature(rng):
    for fp, x, x_T, T, ec in _some_paths(rng):
        L = lambda t: 2.0 * cl.path_momentum(t, ec) ** 2 * cl.path_position(t, ec)
        S_num, _ = sp_integrate.quad(L, 0.0, T, epsabs=0, epsrel=1e-13, limit=200)
        assert cl.action(ec) == pytest.approx(S_num, rel=1e-8, abs=1e-14)
        I_num, _ = sp_integrate.quad(lambda t: 4 * cl.path_momentum(t, ec) + fp.b, 0.0, T,
                                     epsabs=0, epsrel=1e-13, limit=200)
        scale, _ = sp_integrate.quad(lambda t: abs(4 * cl.path_momentum(t, ec) + fp.b), 0.0, T)
        assert abs(cl.mixed_derivative_integral(ec) - I_num) <= 1e-8 * scale


def test_short_path_limits():
    fp = CevParams(0.03, 0.3, -0.6).feller
    ec = cl.constants_from_endpoints(800.0, 800.0, fp, 1e-8)
    assert abs(cl.action(ec)) < 1e-6
    assert abs(cl.mixed_derivative_integral(ec)) < 1e-8


def test_log_domain_error_reports_values():
    fp = FellerParams(a=0.0, b=-0.03, d=0.0)
    ec = cl.EndpointConstants(d1=-1.99, d2=1.0, d=0.0, b=-0.03, maturity=1.0)   # ratio < 0
    with pytest.raises(LogDomainError, match="numerator"):
        cl.action(ec)


def test_vvm_forms_agree(rng):
    for fp, x, x_T, T, ec in _some_paths(rng):
        J = cl.vvm_determinant(ec)
        assert float(cl.vvm_expanded(ec.d1, ec.d2, fp.b, fp.d, T)) == pytest.approx(J, rel=1e-7)
        p_T = cl.path_momentum(0.0, ec)
        assert cl.vvm_determinant_phase(x_T, p_T, fp, T) == pytest.approx(J, rel=1e-9)
        assert cl.vvm_determinant_phase_expanded(x_T, p_T, fp, T) == pytest.approx(J, rel=1e-6)


def test_vvm_phase_vs_flow_jacobian(rng):
    for _ in range(30):
        fp = _random_feller(rng)
        x_T = rng.uniform(10, 1e4)
        p_T = rng.uniform(-0.4, 0.4) * abs(fp.b)
        T = rng.uniform(0.1, 2.0)
        h = 1e-6 * abs(p_T) + 1e-9
        fd = (cl.flow_from_initial(T, x_T, p_T + h, fp).x - cl.flow_from_initial(T, x_T, p_T - h, fp).x) / (2 * h)
        assert cl.vvm_determinant_phase(x_T, p_T, fp, T) == pytest.approx(fd, rel=1e-5)


def test_vvm_small_time():
    fp = CevParams(0.03, 0.3, -0.5).feller
    assert cl.vvm_determinant_phase(4000.0, 0.002, fp, 0.0) == 0.0
    assert float(cl.vvm_arrays(-5.0, 4005.0, fp.b, fp.d, 0.0)) == 0.0
    x_T = 4000.0
    want = 4 * x_T / fp.b * math.expm1(fp.b * 1.0)
    assert cl.vvm_determinant_phase(x_T, 0.0, fp, 1.0) == pytest.approx(want, rel=1e-14)


def test_vvm_symbolic_factorization():
    D1, D2, b, d, T = sp.symbols("D1 D2 b d T")
    q = sp.exp(b * T)
    expanded = (D1**2 - 4 * D2**2 - d**2 + (4 * D2**2 + 2 * D1 * D2) * q
                + (d**2 - 2 * D1 * D2 - D1**2) / q) / (b * D2)
    factored = (q - 1) / (b * D2 * q) * ((2 * D2 * q + D1) * (2 * D2 + D1) - d**2)
    assert sp.simplify(expanded - factored) == 0


def test_vvm_nonpositive_raises():
    ec = cl.EndpointConstants(d1=0.0, d2=-1.0, d=0.0, b=-0.03, maturity=1.0)
    with pytest.raises(KernelDomainError):
        cl.vvm_determinant(ec)


def test_aux_constants_relations(rng):
    for _ in range(30):
        fp = _random_feller(rng)
        x_T = rng.uniform(10, 1e4)
        p_T = rng.uniform(0.05, 0.4) * abs(fp.b) * rng.choice([-1, 1])
        ec = cl.endpoint_constants_from_phase(x_T, p_T, fp, 1.0)
        a1 = cl.aux_constants(ec)
        a2 = cl.aux_constants_from_phase(x_T, p_T, fp)
        assert a1.c1 == pytest.approx(a2.c1, rel=1e-9)
        assert a1.c2 == pytest.approx(a2.c2, rel=1e-9)
        # the relations invert the definitions D1 = d - 4 C1 C2, D2 = C1**2 C2
        assert fp.d - 4 * a2.c1 * a2.c2 == pytest.approx(ec.d1, rel=1e-9, abs=1e-9 * x_T)
        assert a2.c1**2 * a2.c2 == pytest.approx(ec.d2, rel=1e-9, abs=1e-9 * x_T)
    with pytest.raises(MomentumPoleError):
        cl.aux_constants_from_phase(100.0, 0.0, fp)
