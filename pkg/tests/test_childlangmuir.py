import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from midiode.childlangmuir import (
    CL_CONSTANT,
    bounds_check,
    dimensionless_result,
    fixed_point_residual,
    jcl_dimensionless,
    jcl_physical,
    k_factor,
    limit_voltage,
    physical_result,
    solve_delta,
)
from midiode.model import DomainError


def test_k_factor():
    assert k_factor(0) == pytest.approx(1 / math.sqrt(2), rel=1e-15)
    assert k_factor(1) == pytest.approx(2 / math.sqrt(3), rel=1e-15)
    assert k_factor(1.535) == pytest.approx(1.608, abs=5e-4)


def test_solve_delta_unit_current():
    d = solve_delta(1.0)
    assert d == pytest.approx(1.535, abs=0.005)
    # independent bisection on the polynomial form
    g = lambda x: x**3 * math.sqrt(2 + x * x) - 2.25 * (1 + x * x)
    lo, hi = 1.0, 2.0
    for _ in range(80):
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if g(mid) < 0 else (lo, mid)
    assert d == pytest.approx(lo, rel=1e-14)
    assert fixed_point_residual(d, 1.0) <= 1e-10


def test_solve_delta_small_current():
    for j in (1e-6, 1e-9):
        assert solve_delta(j) / (2.25 * j / math.sqrt(2)) ** (1 / 3) == pytest.approx(1, abs=1e-3)


def test_solve_delta_domain():
    with pytest.raises(DomainError):
        solve_delta(0)


def test_monotone_in_current():
    js = np.geomspace(1e-4, 1e3, 60)
    ds = [solve_delta(j) for j in js]
    assert np.all(np.diff(ds) > 0)


def test_dimensionless_law():
    assert jcl_dimensionless(0, 1, 1) == 0
    # delta with K(delta) = 1 solves 1 + d^2 = sqrt(2 + d^2)
    d1 = math.sqrt((math.sqrt(5) - 1) / 2)
    assert k_factor(d1) == pytest.approx(1, abs=1e-15)
    assert jcl_dimensionless(1, 1, d1) == pytest.approx(4 / 9, rel=1e-14)
    assert jcl_dimensionless(1, 1, 1) == pytest.approx(4 / 9 * math.sqrt(3) / 2, rel=1e-15)
    assert jcl_dimensionless(1, 1, 1) == pytest.approx(0.3849, abs=1e-4)
    with pytest.raises(DomainError):
        jcl_dimensionless(1, 0, 1)


def test_physical_law():
    assert CL_CONSTANT == pytest.approx(2.334e-6, rel=5e-3)
    assert jcl_physical(1000, 0.01) == pytest.approx(738, abs=4)
    assert jcl_physical(0, 0.01) == 0
    assert jcl_physical(4000, 0.01) == pytest.approx(8 * jcl_physical(1000, 0.01), rel=1e-14)
    with pytest.raises(DomainError):
        jcl_physical(100, 0)
    r = physical_result(1000, 0.01)
    assert r.mode == "physical" and r.constant == CL_CONSTANT


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-3, 1e3), st.floats(1e-3, 10))
def test_round_trip(j, gap):
    d = solve_delta(j)
    V = limit_voltage(d, gap)
    assert jcl_dimensionless(V, gap, d) == pytest.approx(j, rel=1e-8)
    r = dimensionless_result(j, gap)
    assert r.j_cl == pytest.approx(j, rel=1e-8) and r.K_delta == k_factor(d)


@settings(max_examples=50, deadline=None)
@given(st.floats(1, 1e4), st.floats(1e-3, 1))
def test_physical_over_dimensionless_is_constant(V, gap):
    ratio = jcl_physical(V, gap) / jcl_dimensionless(V, gap, 1.0)
    assert ratio == pytest.approx(CL_CONSTANT * 9 / 4 * k_factor(1.0), rel=1e-12)


def test_bounds():
    d = solve_delta(2.0)
    lower, upper = bounds_check(2.0, d, d * d)
    assert lower and upper
    lower, _ = bounds_check(0.0, 0.3, 0.0)
    assert lower
    lower, upper = bounds_check(2.0, 0.9 * d, 0.5 * (0.9 * d) ** 2)
    assert not lower and not upper
