import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from midiode.model import DomainError
from midiode.tangent import (
    PoleError,
    RequirementError,
    admissible_K2,
    anode_residual,
    build_model,
    case_ii,
    f_eval,
    f_zero_K2,
    first_pole,
    omega,
    pole_free,
    q_polynomial,
    q_roots,
    q_value,
    requirements,
    sigma_coefficients,
    theta_tan_form,
    theta_tangent,
    zeta,
    zeta_min_exact,
)

# a parameter set where the anode condition has a root in K2 near 7.75
ANODE_CASE = (2.0, 1.0, -10.0)


def test_f_eval_examples():
    f, _, _ = f_eval(1, 1, 0, 0)
    assert f == 4
    assert f_eval(1, 1, 0, 0, sign=-1)[0] == -4
    # f -> sqrt(k2) as theta -> 0
    assert f_eval(1e-14, 1, 0.3, 2.25)[0] == pytest.approx(1.5, abs=1e-5)
    with pytest.raises(DomainError):
        f_eval(0, 1, 0, 1)
    with pytest.raises(DomainError):
        f_eval(1, 1, -20, 0)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.2, 5), st.floats(0.5, 2), st.floats(-2, 2), st.floats(0.5, 20))
def test_f_derivatives_by_differences(theta, j, k1, k2):
    h = 1e-5 * theta
    try:
        f, fp, fpp = f_eval(theta, j, k1, k2)
        fl = f_eval(theta - h, j, k1, k2)
        fr = f_eval(theta + h, j, k1, k2)
    except DomainError:
        return
    scale = max(1.0, abs(f)) / theta**2
    assert (fr[0] - fl[0]) / (2 * h) == pytest.approx(fp, abs=1e-6 * scale)
    assert (fr[1] - fl[1]) / (2 * h) == pytest.approx(fpp, abs=1e-5 * scale / theta)


def test_model_identities():
    m = build_model(1.0, 1.0, 0.0, 40.0)
    assert m.Dshift == pytest.approx(m.theta_L - m.fp_L / m.fpp_L, rel=1e-14)
    assert m.R_L**2 + m.fp_L**2 == pytest.approx(2 * m.f_L * m.fpp_L, rel=1e-14)
    assert math.tan(m.C) == pytest.approx(-m.Dshift / m.A, rel=1e-14)
    assert (m.K1, m.K2) == (0.0, 40.0)


def test_model_requirement_errors():
    with pytest.raises(RequirementError):
        build_model(1.0, 1.0, 0.0, 10.0)
    with pytest.raises(RequirementError):
        build_model(1.0, 1.0, 0.0, f_zero_K2(1.0, 0.0))
    with pytest.raises(DomainError):
        build_model(0.0, 1.0, 0.0, 10.0)


def test_insulated_branch():
    m = build_model(1.0, 1.0, 0.0, 40.0, insulated=True)
    assert m.R_L < 0
    with pytest.raises(RequirementError):
        build_model(1.0, 1.0, 0.0, 40.0, r_sign=1, insulated=True)
    # theta(x) is even in the sign of R
    p = build_model(1.0, 1.0, 0.0, 40.0)
    x = np.linspace(0, 0.5, 11)
    np.testing.assert_allclose(theta_tangent(m, x), theta_tangent(p, x), rtol=1e-13)


def test_theta_at_origin_and_slope():
    m = build_model(*ANODE_CASE, 8.0)
    assert theta_tangent(m, 0.0) == 0
    h = 1e-6
    slope = (theta_tangent(m, h) - theta_tangent(m, -h)) / (2 * h)
    assert slope == pytest.approx(m.f0, rel=1e-8)


def test_pole_flagged():
    m = build_model(1.0, 1.0, 0.0, 40.0)
    xp = first_pole(m)
    assert not pole_free(m, xp + 1e-3) and pole_free(m, xp - 1e-3)
    with pytest.raises(PoleError) as info:
        theta_tangent(m, xp)
    assert info.value.x_pole == pytest.approx(xp)
    assert xp == pytest.approx(2 / abs(m.R_L) * (math.atan(abs(m.R_L) / m.fp0) % math.pi), rel=1e-14)


def test_requirement_examples():
    flags = requirements(1, 0, 40)
    assert flags.z_value == pytest.approx(32, rel=1e-14)
    assert flags.parameters_ok
    assert not requirements(1, 0, 10).r_real
    assert not requirements(1.0, 0.0, f_zero_K2(1.0, 0.0)).f_nonzero
    assert not requirements(1 / 3, 0, 40).fpp_formula_applicable


def test_k1_boundary_minimum():
    t = np.linspace(0.01, 5, 100001)
    k1 = -2 * (3 * t + 1) / np.sqrt(t)
    assert k1.max() == pytest.approx(-4 * math.sqrt(3), abs=1e-8)


def test_reality_condition_matches_direct_sign():
    rng = np.random.default_rng(3)
    for _ in range(300):
        t = rng.uniform(0.05, 4)
        K1 = rng.uniform(-5, 5)
        K2 = rng.uniform(0.1, 80)
        try:
            f, fp, fpp = f_eval(t, 1.0, K1, K2)
        except DomainError:
            continue
        direct = 2 * f * fpp - fp * fp > 0
        if abs(2 * f * fpp - fp * fp) > 1e-9 and abs(t - 1 / 3) > 1e-6:
            assert requirements(t, K1, K2).r_real == direct


@settings(max_examples=50, deadline=None)
@given(st.floats(0.5, 3), st.floats(-2, 2), st.floats(0.5, 2))
def test_tan_form_matches_cot_form(theta_L, K1, j):
    K2 = requirements(theta_L, K1, 1.0).z_value + 5
    try:
        m = build_model(theta_L, j, j * K1, j * K2)
    except RequirementError:
        return
    xs = np.linspace(0.0, 0.9 * first_pole(m), 9)
    np.testing.assert_allclose(theta_tangent(m, xs), theta_tan_form(m, xs), atol=1e-10 * max(1, abs(m.A)))


def test_riccati_slope():
    m = build_model(1.0, 1.0, 0.0, 40.0)
    x = np.linspace(0.1, 0.8 * first_pole(m), 7)
    h = 1e-6
    d = (theta_tangent(m, x + h) - theta_tangent(m, x - h)) / (2 * h)
    th = theta_tangent(m, x)
    np.testing.assert_allclose(d, m.B / m.A * (m.A**2 + (th - m.Dshift) ** 2), rtol=1e-7)


def test_anode_residual_root_reaches_anode():
    th, j, K1 = ANODE_CASE
    g = lambda K2: anode_residual(build_model(th, j, j * K1, j * K2))
    K2 = brentq(g, 7.61, 8.11, xtol=1e-14)
    m = build_model(th, j, j * K1, j * K2)
    assert pole_free(m)
    assert theta_tangent(m, 1.0) == pytest.approx(th, abs=1e-10)


def test_anode_residual_small_B():
    m = build_model(1.0, 1.0, 0.0, 40.0)
    B = m.B
    assert anode_residual(m) == pytest.approx(math.tan(B) - omega(m) * B)


def test_q_polynomial_case_i():
    for t in (0.5, 1.0, 2.0):
        q0, _, _, q3 = q_polynomial(t, 0.0)
        assert q0 == pytest.approx(16 * t**2 * (21 + 30 * t + 5 * t**2) ** 2, rel=1e-14)
        assert q3 == pytest.approx(4 * math.sqrt(t) * (3 - t), rel=1e-14)
    assert q_polynomial(3.0, 1.0)[3] == 0
    assert len(q_roots(3.0, 1.0)) == 2


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 5), st.floats(-5, 5))
def test_q_root_residual(theta_L, K1):
    qs = q_polynomial(theta_L, K1)
    scale = max(map(abs, qs))
    for r in admissible_K2(theta_L, K1):
        z = r.K2
        val = ((qs[3] * z + qs[2]) * z + qs[1]) * z + qs[0]
        assert abs(val) <= 1e-8 * scale * max(1, abs(z)) ** 3
        assert (r.flags is not None) == r.positive_real


def test_case_ii_examples():
    k_min, _ = case_ii(0.75)
    assert abs(k_min + 92 * math.sqrt(3) / 27) <= 1e-12
    assert zeta_min_exact(Fraction(1, 3)) == 0
    assert abs(case_ii(1 / 3)[1]) <= 1e-12
    assert zeta_min_exact(Fraction(1, 4)) == Fraction(36, 256) * 0 + (Fraction(36, 256) + Fraction(35, 16) - Fraction(10, 4) - 1) / (3 * Fraction(1, 8))
    assert zeta_min_exact(Fraction(1, 2)) is None


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 10))
def test_sigma_positive_and_vertex(theta_L):
    s = sigma_coefficients(theta_L)
    assert min(s) > 0
    k_min, z_min = case_ii(theta_L)
    assert zeta(theta_L, k_min) == pytest.approx(z_min, abs=1e-12 * max(1, *map(abs, s)) * max(1, k_min**2))
    assert zeta(theta_L, k_min + 0.1) > z_min and zeta(theta_L, k_min - 0.1) > z_min


def test_zeta_min_sign_structure():
    # the true vertex value is negative below theta_L = 1/3 and positive above
    below = np.linspace(0.01, 1 / 3 - 1e-3, 50)
    above = np.linspace(1 / 3 + 1e-3, 2.0, 50)
    assert all(case_ii(t)[1] < 0 for t in below)
    assert all(case_ii(t)[1] > 0 for t in above)
