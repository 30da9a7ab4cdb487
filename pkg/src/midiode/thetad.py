"""Turning-point potentials Theta_d = u^2 and classification of the (k, b) plane.

Only roots with a non-negative real part are admissible; the physical values
come from the real non-negative roots. The fold curve Delta = 0 has two
branches b_minus(k), b_plus(k) for k^2 >= 3.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cubic import CBRT4, CubicRoots, roots_array, solve, zero_band
from .model import DomainError, GammaParam, ScaledParams, as_pair

ADMIT_TOL = 1e-12
PROP10_RESIDUAL = 1e-8
FLAG_MARGIN = 1e-12


@dataclass(frozen=True)
class ThetaBranches:
    """``admissible`` holds (label, Theta) pairs, Theta possibly complex;
    ``physical`` holds (label, Theta) pairs with real Theta >= 0."""

    admissible: tuple[tuple[str, complex], ...]
    physical: tuple[tuple[str, float], ...]

    @property
    def physical_values(self) -> list[float]:
        return [t for _, t in self.physical]


@dataclass(frozen=True)
class RegionClass:
    delta_sign: int
    n_real_roots: int
    n_physical: int
    prop8_applies: bool
    prop9_applies: bool
    prop10_boundary: bool
    s_value: float


def _is_real(u: complex) -> bool:
    return abs(u.imag) <= ADMIT_TOL * max(1.0, abs(u))


def theta_branches(roots: CubicRoots) -> ThetaBranches:
    admissible, physical = [], []
    for i, u in enumerate(roots.roots):
        label = f"u{i + 1}"
        if u.real < -ADMIT_TOL:
            continue
        admissible.append((label, u * u))
        if _is_real(u):
            physical.append((label, u.real**2))
    return ThetaBranches(tuple(admissible), tuple(physical))


def delta_zero_boundary(k_hat: float) -> tuple[float, float] | None:
    """Real roots (b_minus, b_plus) of Delta(k, b) = 0 viewed as a quadratic in b.

    Returns None when k^2 < 3. The larger-magnitude root is formed directly and
    the other one from the product (4 - k^2)/27, so neither branch cancels.
    """
    k = float(k_hat)
    gap = k * k - 3
    if gap < -1e-12 * max(1.0, k * k):
        return None
    root = 2 * max(gap, 0.0) ** 1.5
    lead = k * (9 - 2 * k * k)
    prod = (4 - k * k) / 27
    if lead >= 0:
        plus = (lead + root) / 27
        minus = prod / plus if plus != 0 else (lead - root) / 27
    else:
        minus = (lead - root) / 27
        plus = prod / minus if minus != 0 else (lead + root) / 27
    return minus, plus


def boundary_array(k):
    """Vectorised delta_zero_boundary; NaN where k^2 < 3."""
    k = np.asarray(k, dtype=float)
    gap = k * k - 3
    ok = gap >= -1e-12 * np.maximum(1.0, k * k)
    root = 2 * np.maximum(gap, 0.0) ** 1.5
    lead = k * (9 - 2 * k * k)
    prod = (4 - k * k) / 27
    with np.errstate(divide="ignore", invalid="ignore"):
        p_direct = (lead + root) / 27
        m_direct = (lead - root) / 27
        plus = np.where(lead >= 0, p_direct, np.where(m_direct != 0, prod / m_direct, p_direct))
        minus = np.where(lead >= 0, np.where(p_direct != 0, prod / p_direct, m_direct), m_direct)
    return np.where(ok, minus, np.nan), np.where(ok, plus, np.nan)


def classify_array(k, b):
    """Region fields for arrays of (k, b), as a dict of equally shaped arrays."""
    k, b = np.broadcast_arrays(np.asarray(k, dtype=float), np.asarray(b, dtype=float))
    roots, disc, _, _ = roots_array(k, b)
    band = zero_band(k, b)
    sign = np.where(np.abs(disc) < band, 0, np.sign(disc)).astype(np.int8)

    real = np.abs(roots.imag) <= ADMIT_TOL * np.maximum(1.0, np.abs(roots))
    n_real = real.sum(axis=-1)
    n_phys = (real & (roots.real >= -ADMIT_TOL)).sum(axis=-1)

    one_real = sign < 0
    # the real root is the one with zero imaginary part; take it explicitly
    u_real = np.where(real, roots.real, np.nan)
    u_real = np.nanmax(np.where(one_real[..., None], u_real, np.nan), axis=-1, initial=-np.inf)
    s_value = np.where(one_real, 18 / CBRT4 * (u_real + k / 3), np.nan)

    s8 = 6 * k / CBRT4
    s9 = -12 * k / CBRT4
    scale = FLAG_MARGIN * np.maximum.reduce([np.ones_like(k), np.abs(s8), np.nan_to_num(np.abs(s_value))])
    prop8 = one_real & (s_value - s8 > scale)
    prop9 = one_real & (s9 - s_value > scale)
    prop10 = prop10_array(k, b) & (sign > 0)
    return {
        "delta": disc,
        "delta_sign": sign,
        "n_real_roots": n_real,
        "n_physical": n_phys,
        "prop8_applies": prop8,
        "prop9_applies": prop9,
        "prop10_boundary": prop10,
        "s_value": s_value,
    }


def prop10_array(k, b):
    """Whether one of the three trigonometric roots sits exactly at u = 0.

    With U = k / (2 sqrt(k^2 - 3)) and V the arccos argument of the
    trigonometric form, the m-th root vanishes iff
    arccos U = arccos(V)/3 + 2 pi m / 3. All three m are checked.
    """
    k = np.asarray(k, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        U = k / (2 * np.sqrt(k * k - 3))
        V = (2 * k**3 - 9 * k + 27 * b) / (18 - 6 * k * k) * np.sqrt(9 / (k * k - 3))
    ok = (k * k > 3) & (np.abs(U) <= 1)
    lhs = np.arccos(np.clip(U, -1, 1))
    third = np.arccos(np.clip(V, -1, 1)) / 3
    resid = np.min([np.abs(lhs - (third + 2 * np.pi * m / 3)) for m in range(3)], axis=0)
    return ok & (np.abs(V) <= 1 + 1e-12) & (resid <= PROP10_RESIDUAL)


def classify_region(sp) -> RegionClass:
    k, b = as_pair(sp)
    f = classify_array(np.array([k]), np.array([b]))
    return RegionClass(
        delta_sign=int(f["delta_sign"][0]),
        n_real_roots=int(f["n_real_roots"][0]),
        n_physical=int(f["n_physical"][0]),
        prop8_applies=bool(f["prop8_applies"][0]),
        prop9_applies=bool(f["prop9_applies"][0]),
        prop10_boundary=bool(f["prop10_boundary"][0]),
        s_value=float(f["s_value"][0]),
    )


def ivp_consistency_roots(gamma) -> ThetaBranches:
    """Theta branches of the turning-point cubic with k = -gamma, b = 0."""
    g = gamma.gamma if isinstance(gamma, GammaParam) else float(gamma)
    if g < 2:
        raise DomainError("gamma < 2 gives no nonzero real turning points")
    return theta_branches(solve(ScaledParams(-g, 0.0)))


def closed_form_thetas(sp) -> dict[str, complex]:
    """Expanded Theta_d expressions written directly in k and b.

    These are independent of root polishing and serve as regression checks:
    Delta < 0 gives the real branch and the conjugate pair (t_R -+ i t_I),
    Delta = 0 the simple and double roots, Delta > 0 the three cosine roots.
    """
    k, b = as_pair(sp)
    disc = 18 * k * b + k * k - 4 - 4 * k**3 * b - 27 * b * b
    if abs(disc) < float(zero_band(k, b)):
        n = 2 * k**3 - 9 * k + 27 * b
        t1 = n * n / (81 - 54 * k * k + 9 * k**4) - (4 * k**4 - 18 * k * k + 54 * k * b) / (27 - 9 * k * k) + k * k / 9
        t2 = n * n / (36 * k**4 - 216 * k * k + 324) - (2 * k**4 - 9 * k * k + 27 * k * b) / (9 * k * k - 27) + k * k / 9
        return {"theta1": t1, "theta2": t2}
    if disc < 0:
        a1 = -(54 * k**3 - 243 * k + 729 * b)
        a2 = np.sqrt(a1 * a1 + 2916 * (3 - k * k) ** 3)
        cp, cm = np.cbrt(a1 + a2), np.cbrt(a1 - a2)
        c2 = np.cbrt(2.0)
        t1 = k * k / 9 - CBRT4 * k / 27 * (cp + cm) + c2 / 162 * (cp * cp + cm * cm - 18 * CBRT4 * (3 - k * k))
        tr = k * k / 9 + CBRT4 * k / 54 * (cp + cm) - c2 / 324 * (cp * cp + cm * cm) - 2 / 9 * (3 - k * k)
        ti = -np.sqrt(3) * CBRT4 * k / 54 * (cp - cm) - np.sqrt(3) * c2 / 324 * (cp * cp - cm * cm)
        return {"theta1": t1, "theta2": complex(tr, -ti), "theta3": complex(tr, ti)}
    a3 = 2 / 3 * np.sqrt(k * k - 3)
    a4 = np.clip((2 * k**3 - 9 * k + 27 * b) / (18 - 6 * k * k) * np.sqrt(9 / (k * k - 3)), -1, 1)
    phi = np.arccos(a4)
    return {f"theta{m + 1}": (a3 * np.cos(phi / 3 - 2 * np.pi * m / 3) - k / 3) ** 2 for m in range(3)}
