"""Tangent-function approximation of the boundary value problem.

The slope of the effective potential, f(theta) = +-sqrt(8 j_x theta^(1/2) (theta + 1)
+ 2 k1 theta + k2), is replaced by its second-order Taylor polynomial about
theta_L. The resulting Riccati-type equation integrates to

    theta(x) = A tan(B x + C) + Dshift

with A = R/f''_0, B = R/2, C = arctan(f'_0/R), Dshift = -f'_0/f''_0 and
R^2 = 2 f_L f''_L - f'_L^2. Imposing theta(0) = 0 gives the closed form
2 f_0 / (R cot(R x / 2) - f'_0) used by theta_tangent.

Parameters are usually quoted in the scaled form K1 = k1/j_x, K2 = k2/j_x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .cubic import solve_monic
from .model import DomainError

EQ_RTOL = 1e-12
POLE_RTOL = 1e-8


class RequirementError(DomainError):
    """A parameter set violates one of the requirements of the approximation."""


class PoleError(DomainError):
    def __init__(self, message, x_pole):
        super().__init__(message)
        self.x_pole = x_pole


def _radicand(theta, j_x, k1, k2):
    return 8 * j_x * math.sqrt(theta) * (theta + 1) + 2 * k1 * theta + k2


def f_eval(theta: float, j_x: float, k1: float, k2: float, sign: int = 1) -> tuple[float, float, float]:
    """f and its first two derivatives in theta, on the branch with the given sign."""
    if theta == 0:
        raise DomainError("derivatives of f are singular at theta = 0")
    if theta < 0:
        raise DomainError("theta must be positive")
    rad = _radicand(theta, j_x, k1, k2)
    if rad <= 0:
        raise DomainError("radicand of f is not positive")
    f = math.copysign(math.sqrt(rad), sign)
    g = 2 * j_x * (3 * theta + 1) / math.sqrt(theta) + k1
    fp = g / f
    fpp = (j_x * (3 * theta - 1) / theta**1.5 - fp * fp) / f
    return f, fp, fpp


# -- requirements -------------------------------------------------------------


def z_coefficients(theta_L: float) -> tuple[float, float, float]:
    d = 3 * theta_L - 1
    r = math.sqrt(theta_L)
    return (
        2 * r * (15 * theta_L**2 + 10 * theta_L + 7) / d,
        4 * theta_L * (3 * theta_L + 2) / d,
        3 * theta_L**1.5 / (2 * d),
    )


def z_threshold(theta_L: float, K1: float) -> float:
    z0, z1, z2 = z_coefficients(theta_L)
    return z0 + z1 * K1 + z2 * K1 * K1


def f_zero_K2(theta_L: float, K1: float) -> float:
    """The K2 at which f(theta_L) vanishes."""
    r = math.sqrt(theta_L)
    return -2 * r * (r * K1 + 4 * (theta_L + 1))


def fpp_zero_K2(theta_L: float, K1: float) -> float:
    """The K2 at which f''(theta_L) vanishes (theta_L != 1/3)."""
    r = math.sqrt(theta_L)
    return r * ((r * K1 + 3 * theta_L + 3) ** 2 / (3 * theta_L - 1) + theta_L - 3)


def _close(a, b):
    return abs(a - b) <= EQ_RTOL * max(1.0, abs(a), abs(b))


@dataclass(frozen=True)
class RequirementFlags:
    f_nonzero: bool
    fpp_nonzero: bool
    fpp_formula_applicable: bool
    r_real: bool
    z_value: float

    @property
    def parameters_ok(self) -> bool:
        return self.f_nonzero and self.fpp_nonzero and self.r_real


def requirements(theta_L: float, K1: float, K2: float) -> RequirementFlags:
    """Parameter requirements of the approximation.

    ``r_real`` is 2 f f'' - f'^2 > 0 at theta_L. Written in (K1, K2) this is
    (3 theta_L - 1)(K2 - Z) > 0 with f real, which can only hold for
    theta_L > 1/3.
    """
    if theta_L <= 0:
        raise DomainError("theta_L must be positive")
    r = math.sqrt(theta_L)
    p = 8 * r * (theta_L + 1) + 2 * K1 * theta_L + K2  # f^2 / j_x
    f_ok = not _close(K2, f_zero_K2(theta_L, K1))
    # f'' = 0  <=>  (3 theta - 1) f^2 / j_x = theta^(1/2) (theta^(1/2) K1 + 6 theta + 2)^2
    lhs = (3 * theta_L - 1) * p
    rhs = r * (r * K1 + 6 * theta_L + 2) ** 2
    fpp_ok = not _close(lhs, rhs)
    applicable = theta_L != 1 / 3
    if applicable:
        z = z_threshold(theta_L, K1)
        r_real = theta_L > 1 / 3 and p > 0 and K2 > z
    else:
        z = math.inf
        r_real = False
    return RequirementFlags(f_ok, fpp_ok, applicable, r_real, z)


# -- model ----------------------------------------------------------------------


@dataclass(frozen=True)
class TangentModel:
    theta_L: float
    j_x: float
    k1: float
    k2: float
    f_L: float
    fp_L: float
    fpp_L: float
    f0: float
    fp0: float
    fpp0: float
    R_L: float
    A: float
    B: float
    C: float
    Dshift: float

    @property
    def K1(self) -> float:
        return self.k1 / self.j_x

    @property
    def K2(self) -> float:
        return self.k2 / self.j_x


def build_model(theta_L: float, j_x: float, k1: float, k2: float, branch_sign: int = 1,
                r_sign: int | None = None, insulated: bool = False) -> TangentModel:
    """Coefficients of the tangent approximation about theta_L.

    ``branch_sign`` picks the sign of f. ``r_sign`` picks the sign of R; the
    insulated mode requires the negative root.
    """
    if theta_L <= 0:
        raise DomainError("theta_L must be positive")
    if insulated:
        if r_sign == 1:
            raise RequirementError("the insulated mode uses the negative root R < 0")
        r_sign = -1
    elif r_sign is None:
        r_sign = 1
    flags = requirements(theta_L, k1 / j_x, k2 / j_x)
    if not flags.f_nonzero:
        raise RequirementError("f(theta_L) = 0 (requirement f != 0)")
    f, fp, fpp = f_eval(theta_L, j_x, k1, k2, branch_sign)
    if not flags.fpp_nonzero or fpp == 0:
        raise RequirementError("f'' = 0 (requirement f''_0 != 0)")
    rr = 2 * f * fpp - fp * fp
    if rr <= 0:
        raise RequirementError("2 f f'' - f'^2 <= 0, so R is not real (requirement arg R > 0)")
    R = r_sign * math.sqrt(rr)
    f0 = 0.5 * theta_L**2 * fpp - theta_L * fp + f
    fp0 = fp - theta_L * fpp
    return TangentModel(
        theta_L=theta_L, j_x=j_x, k1=k1, k2=k2,
        f_L=f, fp_L=fp, fpp_L=fpp,
        f0=f0, fp0=fp0, fpp0=fpp,
        R_L=R, A=R / fpp, B=R / 2, C=math.atan(fp0 / R), Dshift=-fp0 / fpp,
    )


def first_pole(model: TangentModel) -> float:
    """Smallest x > 0 where the denominator R cos(Rx/2) - f'_0 sin(Rx/2) vanishes."""
    R = abs(model.R_L)
    if model.fp0 == 0:
        phase = math.pi / 2
    else:
        phase = math.atan(R / model.fp0)
        if phase <= 0:
            phase += math.pi
    return 2 * phase / R


def theta_tangent(model: TangentModel, x):
    """theta(x) = 2 f0 sin(Rx/2) / (R cos(Rx/2) - f'_0 sin(Rx/2)).

    The expression is even in the sign of R and vanishes exactly at x = 0.
    """
    xx = np.asarray(x, dtype=float)
    R = model.R_L
    s = np.sin(R * xx / 2)
    c = np.cos(R * xx / 2)
    den = R * c - model.fp0 * s
    tol = POLE_RTOL * max(abs(model.fp0), abs(R))
    if np.any(np.abs(den) < tol):
        raise PoleError("theta has a pole at the requested x", first_pole(model))
    out = 2 * model.f0 * s / den
    return float(out) if np.ndim(x) == 0 else out


def theta_tan_form(model: TangentModel, x):
    """The unreduced form A tan(Bx + C) + Dshift."""
    return model.A * np.tan(model.B * np.asarray(x, dtype=float) + model.C) + model.Dshift


def pole_free(model: TangentModel, x_max: float = 1.0) -> bool:
    return first_pole(model) > x_max


def omega(model: TangentModel) -> float:
    den = 2 * model.f_L - model.theta_L * model.fp_L
    if _close(den, 0.0) or den == 0:
        raise RequirementError("Omega undefined: 2 f_L = theta_L f'_L")
    return 2 * model.theta_L / den


def anode_residual(model: TangentModel) -> float:
    """tan B - Omega B; zero exactly when theta(1) = theta_L."""
    th, K1, K2 = model.theta_L, model.K1, model.K2
    if _close(K2, -1.5 * th * K1 - math.sqrt(th) * (5 * th + 7)):
        raise RequirementError("K2 on the excluded line where Omega is undefined")
    l = (abs(model.R_L) / math.pi - 1) / 2
    if abs(l - round(l)) * math.pi * 2 <= EQ_RTOL * max(1.0, abs(model.R_L)):
        raise RequirementError("R_L is an odd multiple of pi, tan B undefined")
    B = model.B
    return math.tan(B) - omega(model) * B


# -- the cubic Q in K2 ------------------------------------------------------------


def q_polynomial(theta_L: float, K1: float) -> tuple[float, float, float, float]:
    if theta_L <= 0:
        raise DomainError("theta_L must be positive")
    t = theta_L
    r = math.sqrt(t)
    q0 = t**2 * (3 * t * K1**2 + 2 * r * (17 + 9 * t) * K1 + 4 * (21 + 30 * t + 5 * t**2)) ** 2
    q1 = (
        4 * t**3 * K1**3
        + 6 * t**2.5 * (31 - 5 * t) * K1**2
        + 4 * t**2 * (327 + 226 * t - 117 * t**2) * K1
        + 8 * t**1.5 * (311 + 525 * t + 57 * t**2 - 141 * t**3)
    )
    q2 = 4 * t**1.5 * (19 - 9 * t) * K1 + 3 * t * (99 + 62 * t - 53 * t**2)
    q3 = 4 * r * (3 - t)
    return q0, q1, q2, q3


def q_value(theta_L: float, K1: float, K2) -> float:
    q0, q1, q2, q3 = q_polynomial(theta_L, K1)
    return ((q3 * K2 + q2) * K2 + q1) * K2 + q0


def q_roots(theta_L: float, K1: float) -> list[complex]:
    """Roots of Q in K2; a quadratic when theta_L = 3."""
    q0, q1, q2, q3 = q_polynomial(theta_L, K1)
    scale = max(abs(q0), abs(q1), abs(q2), abs(q3))
    if abs(q3) <= 1e-14 * scale:
        if q2 == 0:
            return [complex(-q0 / q1)]
        disc = complex(q1 * q1 - 4 * q2 * q0)
        sq = disc**0.5
        big = -(q1 + (sq if q1 >= 0 else -sq)) / 2
        return sorted([big / q2, q0 / big], key=lambda z: (z.real, z.imag))
    return solve_monic(q2 / q3, q1 / q3, q0 / q3)


@dataclass(frozen=True)
class K2Root:
    K2: complex
    positive_real: bool
    flags: RequirementFlags | None


def admissible_K2(theta_L: float, K1: float) -> list[K2Root]:
    """All roots of Q, each with its requirement flags when it is real and positive."""
    out = []
    for z in q_roots(theta_L, K1):
        real = abs(z.imag) <= 1e-10 * max(1.0, abs(z))
        pos = real and z.real > 0
        out.append(K2Root(z, pos, requirements(theta_L, K1, z.real) if pos else None))
    return out


# -- case ii: K1 = K2 = K ------------------------------------------------------------


def sigma_coefficients(theta_L: float) -> tuple[float, float, float]:
    t = theta_L
    return 4 * math.sqrt(t) * (15 * t**2 + 10 * t + 7), 2 * (12 * t**2 + 5 * t + 1), 3 * t**1.5


def zeta(theta_L: float, K: float) -> float:
    s0, s1, s2 = sigma_coefficients(theta_L)
    return s0 + s1 * K + s2 * K * K


def zeta_min_numerator(theta_L):
    """Numerator 36 t^4 + 35 t^2 - 10 t - 1 of the vertex value; exact for Fractions."""
    t = theta_L
    return 36 * t**4 + 35 * t**2 - 10 * t - 1


def case_ii(theta_L: float) -> tuple[float, float]:
    """(K_min, zeta_min): vertex of the parabola zeta(K) = sigma0 + sigma1 K + sigma2 K^2."""
    if theta_L <= 0:
        raise DomainError("theta_L must be positive")
    t = theta_L
    k_min = -(12 * t**2 + 5 * t + 1) / (3 * t**1.5)
    z_min = zeta_min_numerator(t) / (3 * t**1.5)
    return k_min, z_min


def zeta_min_exact(theta_L: Fraction) -> Fraction | None:
    """zeta_min as a Fraction when theta_L^(3/2) is rational, else None.

    At theta_L = 1/3 the numerator vanishes, so the value is exactly zero.
    """
    t = Fraction(theta_L)
    num = zeta_min_numerator(t)
    if num == 0:
        return Fraction(0)
    n, d = t.numerator, t.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn != n or rd * rd != d:
        return None
    return num / (3 * t * Fraction(rn, rd))
