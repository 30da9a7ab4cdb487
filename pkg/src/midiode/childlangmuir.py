"""Child-Langmuir space-charge limited current.

The dimensionless law carries the correction K(delta) = (1 + delta^2) / sqrt(2 + delta^2),
where delta solves delta^3 sqrt(2 + delta^2) = (9/4) j_x (1 + delta^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .model import DomainError

EPSILON_0 = 8.8541878128e-12  # F/m
E_OVER_M = 1.75882001e11  # C/kg
CL_CONSTANT = 4 / 9 * EPSILON_0 * math.sqrt(2 * E_OVER_M)  # A V^(-3/2)

BOUND_RTOL = 1e-12


@dataclass(frozen=True)
class CLResult:
    delta: float
    K_delta: float
    j_cl: float
    mode: str
    constant: float = CL_CONSTANT


def k_factor(delta: float) -> float:
    return (1 + delta * delta) / math.sqrt(2 + delta * delta)


def _defect(delta: float, j_x: float) -> float:
    return delta**3 * math.sqrt(2 + delta * delta) - 2.25 * j_x * (1 + delta * delta)


def solve_delta(j_x: float) -> float:
    """Positive root of delta^3 sqrt(2 + delta^2) = (9/4) j_x (1 + delta^2)."""
    if j_x <= 0:
        raise DomainError("j_x must be positive")
    hi = 1.0
    while _defect(hi, j_x) < 0:
        hi *= 2
    delta = brentq(_defect, 0.0, hi, args=(j_x,), xtol=1e-300, rtol=1e-15)
    # Newton on the fixed-point form tightens the last bits
    for _ in range(2):
        d = delta
        g = d - (2.25 * j_x * k_factor(d)) ** (1 / 3)
        dk = d * (d * d + 3) / (2 + d * d) ** 1.5
        dg = 1 - (2.25 * j_x) ** (1 / 3) * k_factor(d) ** (-2 / 3) * dk / 3
        if dg != 0:
            delta = d - g / dg
    return delta


def fixed_point_residual(delta: float, j_x: float) -> float:
    return abs(delta - (2.25 * j_x * k_factor(delta)) ** (1 / 3))


def limit_voltage(delta: float, gap: float = 1.0) -> float:
    """Anode voltage at which the current of solve_delta saturates the law."""
    return delta * delta * gap ** (4 / 3)


def _check_gap(gap):
    if gap <= 0:
        raise DomainError("gap must be positive")


def jcl_dimensionless(V: float, gap: float, delta: float) -> float:
    _check_gap(gap)
    if V < 0:
        raise DomainError("V must be non-negative")
    return 4 / 9 / k_factor(delta) * V**1.5 / gap**2


def jcl_physical(V: float, gap: float) -> float:
    """Classical 3/2-power law in A/m^2 for V in volts and gap in metres."""
    _check_gap(gap)
    if V < 0:
        raise DomainError("V must be non-negative")
    return CL_CONSTANT * V**1.5 / gap**2


def bounds_check(j_x_max: float, delta: float, phi_L: float) -> tuple[bool, bool]:
    """(lower, upper) solution conditions; both inequalities are weak."""
    lhs = 4 * delta**3
    rhs = 9 * j_x_max * (1 + delta * delta) / math.sqrt(2 + delta * delta)
    lower = lhs >= rhs - BOUND_RTOL * max(abs(lhs), abs(rhs))
    upper = phi_L >= delta * delta - BOUND_RTOL * max(1.0, delta * delta)
    return lower, upper


def physical_result(V: float, gap: float) -> CLResult:
    return CLResult(delta=math.nan, K_delta=math.nan, j_cl=jcl_physical(V, gap), mode="physical")


def dimensionless_result(j_x: float, gap: float = 1.0) -> CLResult:
    delta = solve_delta(j_x)
    V = limit_voltage(delta, gap)
    return CLResult(delta=delta, K_delta=k_factor(delta), j_cl=jcl_dimensionless(V, gap, delta),
                    mode="dimensionless")
