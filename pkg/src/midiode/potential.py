"""Effective potential D(x) of the Cauchy problem.

D is the inverse of x = I(D) / sqrt(8 j_x) where

    I(z) = int_0^z ds / (s^(1/4) sqrt(W1(s))),   W1(s) = 1 - gamma sqrt(s) + s.

With s = t^4 the integrand becomes 4 t^2 / sqrt(1 - gamma t^2 + t^4), which is
regular at the origin. Three regimes follow from the zeros of W1:

* gamma < 2: W1 > 0, I grows without bound, D is defined on [0, inf).
* gamma = 2: W1 has a double zero at s = 1, I(z) has the closed form
  4 (artanh(t) - t) with t = z^(1/4), and D increases towards 1.
* gamma > 2: I reaches a finite value at the first zero s11. The half period
  is a = I(s11) / sqrt(8 j_x); D is reflected on [a, 2a] and then repeated.

For gamma > 2 the square-root endpoint singularity at t_b = s11^(1/4) is
removed by writing t = t_b - w^2 on the upper half of the interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .model import DomainError, NumericalError

SUBCRITICAL = "Subcritical"
CRITICAL = "Critical"
SUPERCRITICAL = "Supercritical"

CRITICAL_TOL = 1e-12
PANEL = 1.0 / 32.0
SMALL_X_PREFACTOR = (3 / math.sqrt(2)) ** (4 / 3)

_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)


class WZeros(NamedTuple):
    s11: float | None
    s12: float | None
    s21: float | None
    s22: float | None


def w1(s, gamma):
    return 1 - gamma * np.sqrt(s) + s


def w2(s, gamma):
    return 1 / 3 - (2 / 3) * gamma * np.sqrt(s) + s


def _root_pair(half: float, const: float):
    # roots of r^2 - 2*half*r + const in r = sqrt(s); the larger is formed directly
    rad = half * half - const
    if rad < -1e-14 * max(1.0, half * half):
        return None, None
    big = half + math.sqrt(max(rad, 0.0))
    small = const / big
    return small * small, big * big


def w_zeros(gamma: float) -> WZeros:
    s11, s12 = _root_pair(gamma / 2, 1.0)
    s21, s22 = _root_pair(gamma / 3, 1 / 3)
    return WZeros(s11, s12, s21, s22)


def gamma_case(gamma: float) -> str:
    if gamma < 0:
        raise DomainError("gamma must be non-negative")
    if abs(gamma - 2) <= CRITICAL_TOL:
        return CRITICAL
    return SUBCRITICAL if gamma < 2 else SUPERCRITICAL


def upper_limit(gamma: float) -> float:
    """Right end b of the domain of I."""
    case = gamma_case(gamma)
    if case == SUBCRITICAL:
        return math.inf
    if case == CRITICAL:
        return 1.0
    return w_zeros(gamma).s11


def _gl(f, lo, hi):
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    half = 0.5 * (hi - lo)
    pts = (0.5 * (hi + lo))[..., None] + half[..., None] * _GL_X
    return half * (f(pts) @ _GL_W)


def _newton(F, dF, x0, lo, hi, tol=4e-16, iters=60):
    """Vectorised Newton for an increasing F, falling back to bisection
    whenever a step leaves the current bracket."""
    x = np.clip(x0, lo, hi)
    lo = lo.copy()
    hi = hi.copy()
    for _ in range(iters):
        fx = F(x)
        hi = np.where(fx > 0, x, hi)
        lo = np.where(fx < 0, x, lo)
        d = dF(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            trial = x - fx / d
        bad = ~np.isfinite(trial) | (trial < lo) | (trial > hi)
        trial = np.where(fx == 0, x, np.where(bad, 0.5 * (lo + hi), trial))
        moved = np.abs(trial - x)
        x = trial
        if np.all(moved <= tol * np.maximum(1e-3, np.abs(x))):
            return x
    if np.any(moved > 1e-10 * np.maximum(1.0, np.abs(x))):
        raise NumericalError("inversion did not converge")
    return x


class _Table:
    """Panelled Gauss-Legendre tables of I as a function of t = s^(1/4).

    The table itself does not depend on j_x and is cached per gamma.
    """

    def __init__(self, gamma: float):
        self.gamma = float(gamma)
        self.case = gamma_case(gamma)
        self.t_nodes = np.zeros(1)
        self.cum = np.zeros(1)
        if self.case == SUPERCRITICAL:
            z = w_zeros(gamma)
            self.tb = z.s11**0.25
            self.tc = z.s12**0.25
            self.t_split = self.tb / 2
            self.t_nodes = np.linspace(0.0, self.t_split, max(2, math.ceil(self.t_split / PANEL)) + 1)
            self.cum = np.concatenate([[0.0], np.cumsum(_gl(self._ft, self.t_nodes[:-1], self.t_nodes[1:]))])
            self.w_split = math.sqrt(self.tb - self.t_split)
            self.w_nodes = np.linspace(0.0, self.w_split, max(2, math.ceil(self.w_split / PANEL)) + 1)
            self.gcum = np.concatenate([[0.0], np.cumsum(_gl(self._gw, self.w_nodes[:-1], self.w_nodes[1:]))])
            self.I_split = float(self.cum[-1])
            self.I_end = self.I_split + float(self.gcum[-1])
        elif self.case == CRITICAL:
            self.I_end = math.inf
        else:
            self.I_end = math.inf
            self._extend_t(1.0)

    # integrands
    def _ft(self, t):
        return 4 * t * t / np.sqrt(1 - self.gamma * t * t + t**4)

    def _gw(self, w):
        t = self.tb - w * w
        return 8 * t * t / (np.sqrt(2 * self.tb - w * w) * np.sqrt(self.tc**2 - t * t))

    def _extend_t(self, t_max):
        while self.t_nodes[-1] < t_max:
            start = self.t_nodes[-1]
            new = start + PANEL * np.arange(1, 65)
            add = _gl(self._ft, np.concatenate([[start], new[:-1]]), new)
            self.t_nodes = np.concatenate([self.t_nodes, new])
            self.cum = np.concatenate([self.cum, self.cum[-1] + np.cumsum(add)])

    def _extend_I(self, I_max):
        while self.cum[-1] < I_max:
            self._extend_t(self.t_nodes[-1] + 64 * PANEL)

    # forward map
    def integral_t(self, t):
        t = np.asarray(t, dtype=float)
        if self.case == CRITICAL:
            return _critical_I(t)
        out = np.empty_like(t)
        low = t <= self.t_nodes[-1] if self.case == SUPERCRITICAL else np.ones(t.shape, bool)
        if self.case == SUBCRITICAL and t.size:
            self._extend_t(float(t.max()))
        if low.any():
            tl = t[low]
            k = np.clip(np.searchsorted(self.t_nodes, tl, side="right") - 1, 0, len(self.t_nodes) - 2)
            out[low] = self.cum[k] + _gl(self._ft, self.t_nodes[k], tl)
        if (~low).any():
            w = np.sqrt(np.maximum(self.tb - t[~low], 0.0))
            out[~low] = self.I_end - self._G(w)
        return out

    def _G(self, w):
        k = np.clip(np.searchsorted(self.w_nodes, w, side="right") - 1, 0, len(self.w_nodes) - 2)
        return self.gcum[k] + _gl(self._gw, self.w_nodes[k], w)

    # inverse map
    def t_of_integral(self, I):
        I = np.asarray(I, dtype=float)
        if self.case == CRITICAL:
            return _critical_inverse(I)
        out = np.empty_like(I)
        if self.case == SUPERCRITICAL:
            low = I <= self.I_split
        else:
            low = np.ones(I.shape, bool)
            if I.size:
                self._extend_I(float(I.max()))
        if low.any():
            Il = I[low]
            k = np.clip(np.searchsorted(self.cum, Il, side="right") - 1, 0, len(self.cum) - 2)
            lo, hi = self.t_nodes[k], self.t_nodes[k + 1]
            frac = (Il - self.cum[k]) / (self.cum[k + 1] - self.cum[k])
            guess = np.where(k == 0, np.cbrt(0.75 * Il), lo + frac * (hi - lo))
            base = self.cum[k]
            out[low] = _newton(
                lambda t: base + _gl(self._ft, lo, t) - Il, self._ft, guess, lo, hi
            )
        if (~low).any():
            target = self.I_end - I[~low]
            k = np.clip(np.searchsorted(self.gcum, target, side="right") - 1, 0, len(self.gcum) - 2)
            lo, hi = self.w_nodes[k], self.w_nodes[k + 1]
            frac = (target - self.gcum[k]) / (self.gcum[k + 1] - self.gcum[k])
            base = self.gcum[k]
            w = _newton(lambda w: base + _gl(self._gw, lo, w) - target, self._gw, lo + frac * (hi - lo), lo, hi)
            out[~low] = self.tb - w * w
        return out


def _critical_I(t):
    t = np.asarray(t, dtype=float)
    small = t < 0.25
    ts = np.where(small, t, 0.0)
    # 4 (artanh t - t) = 4 sum_{n>=1} t^(2n+1) / (2n+1)
    series = 4 * sum(ts ** (2 * n + 1) / (2 * n + 1) for n in range(1, 24))
    with np.errstate(divide="ignore"):
        closed = 4 * (np.arctanh(np.where(small, 0.5, t)) - np.where(small, 0.5, t))
    return np.where(small, series, closed)


def _critical_inverse(I):
    I = np.asarray(I, dtype=float)
    lo = np.zeros_like(I)
    hi = np.ones_like(I)
    guess = np.where(I < 1, np.cbrt(0.75 * I), np.tanh(I / 4 + 1))
    return _newton(
        lambda t: _critical_I(t) - I,
        lambda t: 4 * t * t / np.maximum((1 - t) * (1 + t), 1e-300),
        guess,
        lo,
        hi,
    )


@lru_cache(maxsize=64)
def _table(gamma: float) -> _Table:
    return _Table(gamma)


def integral_I(z, gamma: float):
    """I(z) for scalar or array z in [0, b]; b itself is allowed when gamma > 2."""
    zz = np.asarray(z, dtype=float)
    b = upper_limit(gamma)
    case = gamma_case(gamma)
    if np.any(zz < 0) or np.any(zz > b) or (case == CRITICAL and np.any(zz >= 1)):
        raise DomainError(f"z outside the domain [0, {b}) of I")
    out = _table(float(gamma)).integral_t(zz**0.25)
    return float(out) if np.ndim(z) == 0 else out


def half_period(gamma: float, j_x: float) -> float:
    if gamma_case(gamma) != SUPERCRITICAL:
        raise DomainError("half period exists only for gamma > 2")
    return _table(float(gamma)).I_end / math.sqrt(8 * j_x)


def _check_jx(j_x):
    if j_x <= 0:
        raise DomainError("j_x must be positive")


def invert_D(x, j_x: float, gamma: float):
    """The D with I(D) = sqrt(8 j_x) x, for scalar or array x."""
    _check_jx(j_x)
    xx = np.asarray(x, dtype=float)
    tab = _table(float(gamma))
    I = xx * math.sqrt(8 * j_x)
    if np.any(xx < 0):
        raise DomainError("x must be non-negative")
    if np.any(I > tab.I_end * (1 + 1e-14)):
        raise DomainError("x beyond the half period; use extend_D")
    t = tab.t_of_integral(np.minimum(I, tab.I_end))
    D = t**4
    return float(D) if np.ndim(x) == 0 else D


def asymptotic_D(x, j_x: float):
    """Leading-order small-x behaviour c j_x^(2/3) x^(4/3)."""
    return SMALL_X_PREFACTOR * j_x ** (2 / 3) * np.asarray(x, dtype=float) ** (4 / 3)


def slope_D(D, j_x: float, gamma: float, sign=1.0):
    """D' from the first integral, D'^2 = 8 j_x sqrt(D) W1(D)."""
    D = np.asarray(D, dtype=float)
    return sign * np.sqrt(8 * j_x * np.sqrt(D) * np.maximum(w1(D, gamma), 0.0))


@dataclass(frozen=True)
class PotentialProfile:
    gamma: float
    j_x: float
    case: str
    b: float
    a_half_period: float | None
    x: np.ndarray = field(repr=False)
    D: np.ndarray = field(repr=False)
    dD: np.ndarray = field(repr=False)
    s_zeros: WZeros = field(default_factory=lambda: WZeros(None, None, None, None))

    @property
    def x_end(self) -> float:
        return float(self.x[-1])

    def at(self, x):
        """D at arbitrary x >= 0, using the periodic extension when gamma > 2."""
        if self.case == SUPERCRITICAL:
            return extend_D(self, x)
        return invert_D(x, self.j_x, self.gamma)

    def slope_at(self, x):
        """D'(x), with the sign flip on the descending half of each period."""
        xx = np.asarray(x, dtype=float)
        D = self.at(xx)
        sign = 1.0
        if self.case == SUPERCRITICAL:
            a = self.a_half_period
            sign = np.where(np.mod(xx, 2 * a) <= a, 1.0, -1.0)
        return slope_D(D, self.j_x, self.gamma, sign)


def profile_grid(x_end: float, n: int = 2048, x_first: float | None = None, geo_fraction: float = 0.25):
    """Grid with geometric spacing near 0 and uniform spacing beyond."""
    if n < 8:
        raise DomainError("profile grid needs at least 8 samples")
    x_first = 1e-5 * x_end if x_first is None else x_first
    x_break = 0.02 * x_end
    n_geo = max(2, int(n * geo_fraction))
    geo = np.geomspace(x_first, x_break, n_geo, endpoint=False)
    uni = np.linspace(x_break, x_end, n - n_geo - 1)
    return np.concatenate([[0.0], geo, uni])


def build_profile(gamma: float, j_x: float, x_end: float | None = None, n: int = 2048) -> PotentialProfile:
    """Sample D and D' on the fundamental interval.

    For gamma > 2 the interval is [0, a]; otherwise [0, x_end] with x_end = 1
    (the diode gap) by default.
    """
    _check_jx(j_x)
    case = gamma_case(gamma)
    zeros = w_zeros(gamma)
    a = None
    if case == SUPERCRITICAL:
        a = half_period(gamma, j_x)
        x_end = a if x_end is None else min(x_end, a)
    elif x_end is None:
        x_end = 1.0
    x = profile_grid(x_end, n)
    D = invert_D(x, j_x, gamma)
    if case == SUPERCRITICAL and x_end == a:
        D[-1] = zeros.s11
    return PotentialProfile(
        gamma=float(gamma),
        j_x=float(j_x),
        case=case,
        b=upper_limit(gamma),
        a_half_period=a,
        x=x,
        D=D,
        dD=slope_D(D, j_x, gamma),
        s_zeros=zeros,
    )


def extend_D(profile: PotentialProfile, x):
    """Reflect on [a, 2a] and repeat with period 2a."""
    if profile.case != SUPERCRITICAL:
        raise DomainError("periodic extension applies only for gamma > 2")
    a = profile.a_half_period
    xx = np.asarray(x, dtype=float)
    xm = np.mod(xx, 2 * a)
    dist = np.abs(xm - a)
    D = invert_D(a - dist, profile.j_x, profile.gamma)
    return float(D) if np.ndim(x) == 0 else D


def fd_weights(z: float, xs, m: int) -> np.ndarray:
    """Finite-difference weights for derivatives 0..m at z (Fornberg's recursion)."""
    xs = np.asarray(xs, dtype=float)
    n = len(xs)
    c = np.zeros((n, m + 1))
    c1, c4 = 1.0, xs[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5, c4 = 1.0, c4, xs[i] - z
        for j in range(i):
            c3 = xs[i] - xs[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c


def fd_derivatives(x, y, half_width: int = 3):
    """First and second derivatives at interior points by centred stencils.

    Returns (index, d1, d2) for points with a full stencil on both sides.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    idx = np.arange(half_width, len(x) - half_width)
    d1 = np.empty(len(idx))
    d2 = np.empty(len(idx))
    for n, i in enumerate(idx):
        sl = slice(i - half_width, i + half_width + 1)
        c = fd_weights(x[i], x[sl], 2)
        d1[n] = c[:, 1] @ y[sl]
        d2[n] = c[:, 2] @ y[sl]
    return idx, d1, d2


def residuals(profile: PotentialProfile, x_min: float = 0.0) -> tuple[float, float]:
    """Max first-integral and ODE residuals on grid points with x > x_min.

    D' and D'' are finite differences of the sampled D (7-point stencils),
    so the check does not reuse the closed-form slope. Three points are lost
    at each end of the positive-x grid.
    """
    # the sample at x = 0 is left out: D is not smooth there
    pos = profile.x > 0
    xs, Ds = profile.x[pos], profile.D[pos]
    idx, d1, d2 = fd_derivatives(xs, Ds)
    keep = xs[idx] > x_min
    D = Ds[idx][keep]
    d1, d2 = d1[keep], d2[keep]
    j, g = profile.j_x, profile.gamma
    first = np.abs(d1 * d1 - 8 * j * np.sqrt(D) * w1(D, g))
    ode = np.abs(d2 - j * (6 * np.sqrt(D) + 2 / np.sqrt(D) - 4 * g))
    return float(first.max()), float(ode.max())
