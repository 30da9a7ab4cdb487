"""Closed-form roots of the cubic family u^3 + k u^2 + u + b = 0.

The solver dispatches on the discriminant:

* ``Delta < 0``: Cardano radicals, one real root and a conjugate pair.
* ``Delta = 0``: triple root at the two points +-(sqrt(3), sqrt(3)/9),
  otherwise a simple root plus a double root.
* ``Delta > 0``: trigonometric (Viete) form, three real roots.

Every function has an array form working elementwise, which the sweep engine
uses on large grids. The scalar entry points wrap a length-one array.

A separate bisection/deflation oracle is provided for validation only.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .model import DomainError, ScaledParams, as_pair

ONE_REAL = "OneRealTwoComplex"
TRIPLE = "TripleRoot"
DOUBLE = "DoubleRoot"
THREE_REAL = "ThreeReal"
CASE_TAGS = (ONE_REAL, TRIPLE, DOUBLE, THREE_REAL)

CBRT4 = float(np.cbrt(4.0))
SQRT3 = float(np.sqrt(3.0))
TRIPLE_POINT = (SQRT3, SQRT3 / 9.0)

ZERO_BAND = 1e-12
TRIPLE_TOL = 1e-6
POLISH_STEPS = 5
POLISH_MAX_MOVE = 1e-4


class DegenerateCubicError(DomainError):
    """Delta = 0 with k^2 = 3 away from the triple points."""


@dataclass(frozen=True)
class CubicRoots:
    roots: tuple[complex, complex, complex]
    discriminant: float
    case_tag: str

    def residuals(self, sp) -> list[float]:
        k, b = as_pair(sp)
        return [abs(((u + k) * u + 1) * u + b) for u in self.roots]


def discriminant(sp) -> float:
    k, b = as_pair(sp)
    return float(discriminant_array(k, b))


def discriminant_array(k, b):
    k = np.asarray(k, dtype=float)
    b = np.asarray(b, dtype=float)
    # explicit products keep the scalar and array paths bit-identical
    return 18 * k * b + k * k - 4 - 4 * (k * k * k) * b - 27 * b * b


def depress(sp) -> tuple[float, float]:
    """Coefficients (p, q) of the shifted cubic y^3 + p y + q with y = u + k/3."""
    k, b = as_pair(sp)
    return (3 - k * k) / 3, (2 * k**3 - 9 * k + 27 * b) / 27


def zero_band(k, b):
    """Half-width of the band |Delta| < band treated as Delta = 0."""
    k = np.asarray(k, dtype=float)
    b = np.asarray(b, dtype=float)
    k3 = k * k * k
    return ZERO_BAND * np.maximum.reduce([np.ones_like(k * b), k3 * k3, b * b])


def _cubic(u, k, b):
    return ((u + k) * u + 1) * u + b


def _polish(u, k, b, steps=POLISH_STEPS):
    # guarded Newton: only accept a step that lowers the residual and stays close
    start = u
    f = _cubic(u, k, b)
    for _ in range(steps):
        d = (3 * u + 2 * k) * u + 1
        ok = np.abs(d) > 1e-300
        trial = u - np.where(ok, f / np.where(ok, d, 1), 0)
        ftrial = _cubic(trial, k, b)
        take = ok & (np.abs(ftrial) < np.abs(f)) & (np.abs(trial - start) <= POLISH_MAX_MOVE)
        if not take.any():
            break
        u = np.where(take, trial, u)
        f = np.where(take, ftrial, f)
    return u


def _polish_double(u, k):
    # a double root is a simple root of the derivative 3u^2 + 2ku + 1
    start = u
    for _ in range(POLISH_STEPS):
        g = (3 * u + 2 * k) * u + 1
        dg = 6 * u + 2 * k
        ok = np.abs(dg) > 1e-300
        trial = u - np.where(ok, g / np.where(ok, dg, 1), 0)
        take = ok & (np.abs((3 * trial + 2 * k) * trial + 1) < np.abs(g))
        take &= np.abs(trial - start) <= POLISH_MAX_MOVE
        if not take.any():
            break
        u = np.where(take, trial, u)
    return u


def cardano_radicals(k, b):
    """Radicals A1, A2 of the one-real-root case (A2 is NaN when Delta > 0)."""
    k = np.asarray(k, dtype=float)
    b = np.asarray(b, dtype=float)
    a1 = -(54 * k**3 - 243 * k + 729 * b)
    rad = a1 * a1 + 2916 * (3 - k * k) ** 3
    a2 = np.sqrt(np.where(rad >= 0, rad, np.nan))
    return a1, a2


def cardano_cube_roots(k, b):
    """The real cube roots c1 = cbrt(A1 + A2), c2 = cbrt(A1 - A2).

    The larger one in magnitude is taken directly and the other from
    c1 * c2 = -9 cbrt(4) (3 - k^2), which avoids cancellation in A1 - A2.
    """
    a1, a2 = cardano_radicals(k, b)
    prod = -9 * CBRT4 * (3 - np.asarray(k, dtype=float) ** 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        big_plus = np.cbrt(a1 + a2)
        big_minus = np.cbrt(a1 - a2)
        c1 = np.where(a1 >= 0, big_plus, np.where(big_minus != 0, prod / big_minus, 0.0))
        c2 = np.where(a1 >= 0, np.where(big_plus != 0, prod / big_plus, 0.0), big_minus)
    return c1, c2


def viete_quantities(k, b):
    """A3 and the (clipped) arccos argument A4 of the three-real-root case."""
    k = np.asarray(k, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        a3 = (2.0 / 3.0) * np.sqrt(k * k - 3)
        a4 = (2 * k**3 - 9 * k + 27 * b) / (18 - 6 * k * k) * np.sqrt(9 / (k * k - 3))
    return a3, np.clip(a4, -1.0, 1.0)


def _sort_roots(r):
    order = np.lexsort((r.imag, r.real), axis=-1)
    return np.take_along_axis(r, order, axis=-1)


def roots_array(k, b, polish=True):
    """Roots for arrays of (k, b).

    Returns ``(roots, disc, codes, degenerate)`` where ``roots`` has a trailing
    axis of length 3 sorted by (real, imag), ``codes`` indexes CASE_TAGS and
    ``degenerate`` marks Delta = 0 points with k^2 = 3 away from the triple
    points (those fall back to the radical forms).
    """
    k, b = np.broadcast_arrays(np.asarray(k, dtype=float), np.asarray(b, dtype=float))
    shape = k.shape
    k = k.ravel()
    b = b.ravel()
    n = k.size
    disc = discriminant_array(k, b)
    band = zero_band(k, b)
    on_zero = np.abs(disc) < band

    near_kk3 = np.abs(k * k - 3) <= 1e-9
    sgn = np.where(k >= 0, 1.0, -1.0)
    dist = np.hypot(np.abs(k) - SQRT3, sgn * b - TRIPLE_POINT[1])
    triple = on_zero & near_kk3 & (dist <= TRIPLE_TOL)
    degenerate = on_zero & near_kk3 & ~triple
    double = on_zero & ~near_kk3
    one_real = ~on_zero & (disc < 0) | (degenerate & (disc <= 0))
    three_real = ~on_zero & (disc > 0) | (degenerate & (disc > 0))

    roots = np.empty((n, 3), dtype=complex)
    codes = np.empty(n, dtype=np.int8)

    if one_real.any():
        kk, bb = k[one_real], b[one_real]
        c1, c2 = cardano_cube_roots(kk, bb)
        s, d = c1 + c2, c1 - c2
        u1 = -kk / 3 + CBRT4 / 18 * s
        re = -kk / 3 - CBRT4 / 36 * s
        im = np.abs(SQRT3 * CBRT4 / 36 * d)
        u2 = re + 1j * im
        if polish:
            u1 = _polish(u1, kk, bb)
            u2 = _polish(u2, kk, bb)
        roots[one_real] = np.stack([u1 + 0j, u2, np.conj(u2)], axis=-1)
        codes[one_real] = 0

    if three_real.any():
        kk, bb = k[three_real], b[three_real]
        a3, a4 = viete_quantities(kk, bb)
        phi = np.arccos(a4)
        us = [-kk / 3 + a3 * np.cos(phi / 3 - 2 * np.pi * m / 3) for m in range(3)]
        if polish:
            us = [_polish(u, kk, bb) for u in us]
        roots[three_real] = np.stack(us, axis=-1) + 0j
        codes[three_real] = 3

    if triple.any():
        roots[triple] = (-sgn[triple] * SQRT3 / 3)[:, None] + 0j
        codes[triple] = 1

    if double.any():
        kk, bb = k[double], b[double]
        simple = (kk * kk * kk - 4 * kk + 9 * bb) / (3 - kk * kk)
        twin = (-kk + 9 * bb) / (2 * kk * kk - 6)
        if polish:
            simple = _polish(simple, kk, bb)
            twin = _polish_double(twin, kk)
        roots[double] = np.stack([simple, twin, twin], axis=-1) + 0j
        codes[double] = 2

    roots = _sort_roots(roots)
    return (
        roots.reshape(shape + (3,)),
        disc.reshape(shape),
        codes.reshape(shape),
        degenerate.reshape(shape),
    )


def _polish1(u, k, b):
    start = u
    f = ((u + k) * u + 1) * u + b
    for _ in range(POLISH_STEPS):
        d = (3 * u + 2 * k) * u + 1
        if abs(d) <= 1e-300:
            break
        trial = u - f / d
        ftrial = ((trial + k) * trial + 1) * trial + b
        if not (abs(ftrial) < abs(f) and abs(trial - start) <= POLISH_MAX_MOVE):
            break
        u, f = trial, ftrial
    return u


def _polish1_double(u, k):
    start = u
    for _ in range(POLISH_STEPS):
        g = (3 * u + 2 * k) * u + 1
        dg = 6 * u + 2 * k
        if abs(dg) <= 1e-300:
            break
        trial = u - g / dg
        if not (abs((3 * trial + 2 * k) * trial + 1) < abs(g) and abs(trial - start) <= POLISH_MAX_MOVE):
            break
        u = trial
    return u


def _solve_scalar(k: float, b: float):
    """roots_array for one point on plain floats; returns (roots, disc, code, degenerate)."""
    k3 = k * k * k
    disc = 18 * k * b + k * k - 4 - 4 * k3 * b - 27 * b * b
    on_zero = abs(disc) < ZERO_BAND * max(1.0, k3 * k3, b * b)
    near_kk3 = abs(k * k - 3) <= 1e-9
    sgn = 1.0 if k >= 0 else -1.0
    triple = degenerate = False
    if on_zero and near_kk3:
        triple = math.hypot(abs(k) - SQRT3, sgn * b - TRIPLE_POINT[1]) <= TRIPLE_TOL
        degenerate = not triple
    if triple:
        u = complex(-sgn * SQRT3 / 3)
        return (u, u, u), disc, 1, False
    if on_zero and not degenerate:
        simple = _polish1((k3 - 4 * k + 9 * b) / (3 - k * k), k, b)
        twin = _polish1_double((-k + 9 * b) / (2 * k * k - 6), k)
        roots, code = [simple, twin, twin], 2
    elif (not on_zero and disc < 0) or (degenerate and disc <= 0):
        c1, c2 = (float(c) for c in cardano_cube_roots(k, b))
        s, d = c1 + c2, c1 - c2
        u1 = _polish1(-k / 3 + CBRT4 / 18 * s, k, b)
        u2 = _polish1(complex(-k / 3 - CBRT4 / 36 * s, abs(SQRT3 * CBRT4 / 36 * d)), k, b)
        roots, code = [u1, u2, u2.conjugate()], 0
    else:
        a3, a4 = (float(q) for q in viete_quantities(k, b))
        phi = float(np.arccos(a4))
        roots = [_polish1(-k / 3 + a3 * float(np.cos(phi / 3 - 2 * np.pi * m / 3)), k, b) for m in range(3)]
        code = 3
    roots = sorted((complex(u) for u in roots), key=lambda u: (u.real, u.imag))
    return tuple(roots), disc, code, degenerate


def solve(sp) -> CubicRoots:
    k, b = as_pair(sp)
    roots, disc, code, degenerate = _solve_scalar(float(k), float(b))
    if degenerate:
        raise DegenerateCubicError(
            f"Delta = 0 with k^2 = 3 at ({k!r}, {b!r}) is not a triple point"
        )
    return CubicRoots(roots, float(disc), CASE_TAGS[code])


# -- validation oracle ------------------------------------------------------


def oracle_array(k, b, bisect_steps=90):
    """Roots by bisection for the real root, deflation, then Newton refinement."""
    k, b = np.broadcast_arrays(np.asarray(k, dtype=float), np.asarray(b, dtype=float))
    shape = k.shape
    k = k.ravel()
    b = b.ravel()
    bound = 1 + np.maximum.reduce([np.abs(k), np.abs(b), np.ones_like(k)])
    lo, hi = -bound, bound.copy()
    for _ in range(bisect_steps):
        mid = 0.5 * (lo + hi)
        up = _cubic(mid, k, b) >= 0
        hi = np.where(up, mid, hi)
        lo = np.where(up, lo, mid)
    r = 0.5 * (lo + hi)

    # u^3 + k u^2 + u + b = (u - r)(u^2 + B u + C)
    B = k + r
    C = 1 + r * B
    qd = B * B - 4 * C
    sq = np.sqrt(np.abs(qd))
    big = -0.5 * (B + np.where(B >= 0, 1.0, -1.0) * sq)
    safe = np.where(big != 0, big, 1.0)
    real_pair = np.stack([big, np.where(big != 0, C / safe, 0.0)], axis=-1) + 0j
    cplx_pair = np.stack([-B / 2 + 0.5j * sq, -B / 2 - 0.5j * sq], axis=-1)
    pair = np.where((qd >= 0)[:, None], real_pair, cplx_pair)
    out = np.concatenate([r[:, None] + 0j, pair], axis=-1)
    for j in range(3):
        out[:, j] = _polish(out[:, j], k, b, steps=3)
    return _sort_roots(out).reshape(shape + (3,))


def _oracle_scalar(k: float, b: float) -> np.ndarray:
    # same steps as oracle_array on plain floats; numpy overhead dominates at size 1
    bound = 1 + max(abs(k), abs(b), 1.0)
    lo, hi = -bound, bound
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        if ((mid + k) * mid + 1) * mid + b >= 0:
            hi = mid
        else:
            lo = mid
    r = 0.5 * (lo + hi)
    B = k + r
    C = 1 + r * B
    qd = B * B - 4 * C
    sq = math.sqrt(abs(qd))
    if qd >= 0:
        big = -0.5 * (B + (1.0 if B >= 0 else -1.0) * sq)
        pair = [complex(big), complex(C / big if big != 0 else 0.0)]
    else:
        pair = [complex(-B / 2, 0.5 * sq), complex(-B / 2, -0.5 * sq)]
    out = []
    for u in [complex(r), *pair]:
        start = u
        f = ((u + k) * u + 1) * u + b
        for _ in range(3):
            d = (3 * u + 2 * k) * u + 1
            if abs(d) <= 1e-300:
                break
            trial = u - f / d
            ftrial = ((trial + k) * trial + 1) * trial + b
            if not (abs(ftrial) < abs(f) and abs(trial - start) <= POLISH_MAX_MOVE):
                break
            u, f = trial, ftrial
        out.append(u)
    return _sort_roots(np.array([out]))[0]


def oracle_roots(sp) -> CubicRoots:
    k, b = as_pair(sp)
    roots = _oracle_scalar(float(k), float(b))
    disc = discriminant(sp)
    if abs(disc) < float(zero_band(k, b)):
        tag = TRIPLE if np.ptp(roots.real) < 1e-4 and np.abs(roots.imag).max() < 1e-4 else DOUBLE
    else:
        tag = ONE_REAL if disc < 0 else THREE_REAL
    return CubicRoots(tuple(complex(u) for u in roots), disc, tag)


# -- helpers ----------------------------------------------------------------

_PERMS = np.array(list(itertools.permutations(range(3))))


def multiset_distance(a, b):
    """Smallest max-abs difference over the 6 pairings of two root triples."""
    a = np.asarray(a)
    b = np.asarray(b)
    diffs = np.abs(a[..., None, :] - b[..., _PERMS])
    return diffs.max(axis=-1).min(axis=-1)


def solve_monic(a: float, b: float, c: float) -> list[complex]:
    """Roots of x^3 + a x^2 + b x + c.

    For b > 0 the substitution x = sqrt(b) y maps the problem onto the family
    above. Otherwise the shifted cubic is solved by radicals or cosines.
    """
    if b > 0:
        s = np.sqrt(b)
        r = solve(ScaledParams(a / s, c / (b * s)))
        ys = np.array(r.roots)
        xs = ys * s
    else:
        p = b - a * a / 3
        q = 2 * a**3 / 27 - a * b / 3 + c
        xs = _shifted_roots(p, q) - a / 3
    for _ in range(POLISH_STEPS):
        f = ((xs + a) * xs + b) * xs + c
        d = (3 * xs + 2 * a) * xs + b
        step = np.where(np.abs(d) > 1e-300, f / np.where(d == 0, 1, d), 0)
        xs = np.where(np.abs((((xs - step) + a) * (xs - step) + b) * (xs - step) + c) < np.abs(f), xs - step, xs)
    return [complex(x) for x in _sort_roots(np.asarray(xs, dtype=complex))]


def _shifted_roots(p: float, q: float) -> np.ndarray:
    # y^3 + p y + q with p <= 0 or general sign
    disc = -(4 * p**3 + 27 * q * q)
    if p == 0 and q == 0:
        return np.zeros(3, dtype=complex)
    if disc > 0:
        m = 2 * np.sqrt(-p / 3)
        phi = np.arccos(np.clip(3 * q / (p * m), -1, 1))
        return np.array([m * np.cos(phi / 3 - 2 * np.pi * j / 3) for j in range(3)], dtype=complex)
    w = np.sqrt(q * q / 4 + p**3 / 27)
    big = np.cbrt(-q / 2 - w) if q >= 0 else np.cbrt(-q / 2 + w)
    small = -p / (3 * big) if big != 0 else 0.0
    y1 = big + small
    re = -y1 / 2
    im = SQRT3 / 2 * abs(big - small)
    return np.array([y1, re + 1j * im, re - 1j * im], dtype=complex)
