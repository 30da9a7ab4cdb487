"""Coupled potentials (u, v) driven by a given effective potential D.

Both satisfy the linear equation w'' = j_x w / sqrt(D) with u(0) = 1,
u'(0) = alpha, v(0) = 0, v'(0) = beta. Near x = 0 the kernel 1/sqrt(D) is
singular, so the first stretch [0, delta] is solved as a Volterra integral
equation by Picard iteration; the rest is ordinary ODE stepping.

For the Picard step the integrals are written in t = D^(1/4). Then
ds / sqrt(D) = 4 dt / (sqrt(8 j_x) sqrt(1 - gamma t^2 + t^4)), which is
smooth, and a Chebyshev cumulative-integration matrix is spectrally accurate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as cheb
from scipy.integrate import solve_ivp

from .model import DomainError, NumericalError
from .potential import SUPERCRITICAL, PotentialProfile, _table, slope_D

PICARD_TOL = 1e-15
PICARD_NODES = 40
DEFAULT_DELTA = 0.1


class ContractionError(DomainError):
    """The Picard interval is too long for the operator to contract with L <= 1/2."""


class DomainEndError(DomainError):
    """D reaches zero inside the requested interval."""

    def __init__(self, message, x_reached, partial=None):
        super().__init__(message)
        self.x_reached = x_reached
        self.partial = partial


@dataclass(frozen=True)
class UVProfile:
    x: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    du: np.ndarray = field(repr=False)
    dv: np.ndarray = field(repr=False)
    alpha: float
    beta_a: float
    delta_contraction: float
    contraction_L: float
    picard_history: tuple[float, ...] = field(repr=False, default=())
    source_potential: PotentialProfile | None = field(repr=False, default=None)


def _cumulative_matrix(n: int) -> np.ndarray:
    """Q with (Q f)_i = int_{-1}^{y_i} f for f sampled at Chebyshev-Lobatto y_i."""
    y = -np.cos(np.pi * np.arange(n) / (n - 1))
    V = cheb.chebvander(y, n - 1)
    Vinv = np.linalg.inv(V)
    Q = np.empty((n, n))
    for k in range(n):
        Q[:, k] = cheb.chebval(y, cheb.chebint(Vinv[:, k], lbnd=-1))
    return Q


class _Kernel:
    """Nodes and weights for the integrals on [0, delta] in the t variable."""

    def __init__(self, profile: PotentialProfile, delta: float, n: int = PICARD_NODES):
        j, g = profile.j_x, profile.gamma
        tab = _table(g)
        root8j = math.sqrt(8 * j)
        t_end = float(tab.t_of_integral(np.array([delta * root8j]))[0])
        y = -np.cos(np.pi * np.arange(n) / (n - 1))
        self.t = 0.5 * t_end * (y + 1)
        self.Q = 0.5 * t_end * _cumulative_matrix(n)
        self.x = tab.integral_t(self.t) / root8j
        self.x[-1] = delta
        self.mu = 4 / (root8j * np.sqrt(1 - g * self.t**2 + self.t**4))
        self.j = j
        self.delta = delta

    def contraction(self) -> float:
        # L = j_x * delta * int_0^delta D^(-1/2) ds
        return self.j * self.delta * float((self.Q @ self.mu)[-1])

    def apply(self, w, c0, c1):
        """c0 + c1 x + j_x int_0^x (x - s) w(s) / sqrt(D(s)) ds at the nodes."""
        a = self.Q @ (self.mu * w)
        b = self.Q @ (self.mu * w * self.x)
        return c0 + c1 * self.x + self.j * (self.x * a - b)

    def slope(self, w, c1):
        return c1 + self.j * (self.Q @ (self.mu * w))


def contraction_constant(profile: PotentialProfile, delta: float) -> float:
    return _Kernel(profile, delta).contraction()


def choose_delta(profile: PotentialProfile, delta0: float = DEFAULT_DELTA, target: float = 0.5) -> float:
    """Largest delta0 / 2^m giving a contraction constant <= target."""
    delta = delta0
    if profile.case == SUPERCRITICAL:
        delta = min(delta, profile.a_half_period / 2)
    for _ in range(60):
        if contraction_constant(profile, delta) <= target:
            return delta
        delta /= 2
    raise ContractionError("no admissible Picard interval found")


def picard_solve_local(profile: PotentialProfile, alpha: float, beta: float, delta: float,
                       tol: float = PICARD_TOL, max_iter: int | None = None) -> UVProfile:
    ker = _Kernel(profile, delta)
    L = ker.contraction()
    if L > 0.5:
        raise ContractionError(f"contraction constant {L:.3g} > 1/2 at delta = {delta}; use a smaller delta")
    if max_iter is None:
        max_iter = math.ceil(math.log(tol) / math.log(max(L, 1e-300))) + 20 if L > 0 else 2
    u = np.ones_like(ker.x)
    v = np.zeros_like(ker.x)
    history = []
    for _ in range(max_iter):
        u_new = ker.apply(u, 1.0, alpha)
        v_new = ker.apply(v, 0.0, beta)
        change = float(max(np.abs(u_new - u).max(), np.abs(v_new - v).max()))
        history.append(change)
        u, v = u_new, v_new
        if change <= tol * max(1.0, float(np.abs(u).max())):
            break
        # rounding floor: the change stopped shrinking well below any useful level
        if len(history) > 3 and change >= history[-2] and change < 1e-12:
            break
    else:
        raise NumericalError("Picard iteration did not converge")
    return UVProfile(
        x=ker.x.copy(),
        u=u,
        v=v,
        du=ker.slope(u, alpha),
        dv=ker.slope(v, beta),
        alpha=float(alpha),
        beta_a=float(beta),
        delta_contraction=float(delta),
        contraction_L=L,
        picard_history=tuple(history),
        source_potential=profile,
    )


def continue_solution(local: UVProfile, x_end: float, n_out: int = 801,
                      rtol: float = 3e-14, atol: float = 1e-20) -> UVProfile:
    """Extend a local solution from its right end to x_end.

    D is integrated alongside (u, v) from its own second-order equation, which
    also carries it through the turning point at x = a when gamma > 2.

    The tolerances default to the tightest DOP853 accepts: u and v grow like
    exp(x) once D is of order one, and u^2 - 1 - v^2 cancels that growth.
    """
    prof = local.source_potential
    x0 = float(local.x[-1])
    if x_end <= x0:
        return local
    j, g = prof.j_x, prof.gamma
    D0 = float(prof.at(x0))
    y0 = [D0, float(prof.slope_at(x0)), local.u[-1], local.du[-1], local.v[-1], local.dv[-1]]

    def rhs(_, y):
        D = max(y[0], 1e-300)
        r = math.sqrt(D)
        k = j / r
        return [y[1], j * (6 * r + 2 / r - 4 * g), y[3], k * y[2], y[5], k * y[4]]

    floor = 1e-3 * D0

    def hits_floor(_, y):
        return y[0] - floor

    hits_floor.terminal = True
    hits_floor.direction = -1

    x_out = np.linspace(x0, x_end, n_out)
    sol = solve_ivp(rhs, (x0, x_end), y0, method="DOP853", rtol=rtol, atol=atol,
                    t_eval=x_out, events=hits_floor)
    if sol.status == -1:
        raise NumericalError(f"continuation failed: {sol.message}")
    xs = sol.t[1:]
    ys = sol.y[:, 1:]
    out = UVProfile(
        x=np.concatenate([local.x, xs]),
        u=np.concatenate([local.u, ys[2]]),
        v=np.concatenate([local.v, ys[4]]),
        du=np.concatenate([local.du, ys[3]]),
        dv=np.concatenate([local.dv, ys[5]]),
        alpha=local.alpha,
        beta_a=local.beta_a,
        delta_contraction=local.delta_contraction,
        contraction_L=local.contraction_L,
        picard_history=local.picard_history,
        source_potential=prof,
    )
    if sol.status == 1:
        x_hit = float(sol.t_events[0][0])
        raise DomainEndError(f"D falls to zero near x = {x_hit:.6g}", x_hit, out)
    return out


def default_interval(profile: PotentialProfile, delta: float) -> float:
    """Unit gap, cut short of the next zero of D when gamma > 2."""
    if profile.case == SUPERCRITICAL:
        return min(1.0, 2 * profile.a_half_period - delta)
    return 1.0


def solve_uv(profile: PotentialProfile, alpha: float, beta: float, x_end: float | None = None,
             delta: float | None = None) -> UVProfile:
    """Picard on [0, delta] followed by continuation to x_end."""
    if delta is None:
        delta = choose_delta(profile)
    local = picard_solve_local(profile, alpha, beta, delta)
    if x_end is None:
        x_end = default_interval(profile, delta)
    return continue_solution(local, x_end)


def identity_residual(uv: UVProfile, rel_tol: float = 1e-10) -> float:
    """max |u^2 - 1 - v^2 - D| using D from the potential module."""
    prof = uv.source_potential
    if prof is None:
        raise DomainError("profile has no source potential")
    if abs(uv.alpha) > 0:
        raise DomainError("the identity needs alpha = 0")
    if abs(uv.beta_a**2 - 2 * prof.j_x * prof.gamma) > rel_tol * max(1.0, uv.beta_a**2):
        raise DomainError("the identity needs beta^2 = 2 j_x gamma")
    D = prof.at(uv.x)
    return float(np.max(np.abs(uv.u**2 - 1 - uv.v**2 - D)))


def energy_residual(uv: UVProfile) -> float:
    """max |u'^2 - v'^2 - (2 j_x sqrt(D) - beta^2)|."""
    prof = uv.source_potential
    D = prof.at(uv.x)
    return float(np.max(np.abs(uv.du**2 - uv.dv**2 - (2 * prof.j_x * np.sqrt(D) - uv.beta_a**2))))


def vacuum_extension(x_star: float, u_star: float, du_star: float, v_star: float, dv_star: float):
    """Linear potentials on (x_star, 1] matching values and slopes at x_star.

    Returns (phi_L, a_L, lines) where lines maps "phi" and "a" to
    (value at x_star, slope).
    """
    if not 0 < x_star <= 1:
        raise DomainError("x_star must lie in (0, 1]")
    phi0 = u_star - 1
    phi_L = phi0 + du_star * (1 - x_star)
    a_L = v_star + dv_star * (1 - x_star)
    return phi_L, a_L, {"phi": (phi0, du_star), "a": (v_star, dv_star)}


__all__ = [
    "ContractionError",
    "DomainEndError",
    "UVProfile",
    "choose_delta",
    "contraction_constant",
    "continue_solution",
    "default_interval",
    "energy_residual",
    "identity_residual",
    "picard_solve_local",
    "slope_D",
    "solve_uv",
    "vacuum_extension",
]
