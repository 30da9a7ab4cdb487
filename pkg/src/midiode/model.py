"""Diode parameters, the reduced cubic coordinates and the error types shared by
every other module."""

from __future__ import annotations

from dataclasses import dataclass


class DomainError(ValueError):
    """An input lies outside the region where an operation is defined."""


class NumericalError(RuntimeError):
    """An iterative method failed to converge or lost its accuracy guarantee."""


@dataclass(frozen=True)
class DiodeParams:
    """Raw dimensionless diode parameters.

    ``beta_a`` is the initial slope of the magnetic potential and ``beta_phi``
    the initial slope of the electric potential. They are kept apart because
    the two reductions of the model use the same letter for different slopes.
    """

    j_x: float
    beta_a: float = 0.0
    beta_phi: float = 0.0
    k: float = 0.0
    phi_L: float = 0.0
    a_L: float = 0.0

    def __post_init__(self):
        if self.beta_a < 0 or self.beta_phi < 0:
            raise DomainError("initial slopes must be non-negative")


@dataclass(frozen=True)
class ScaledParams:
    """Coordinates (k_hat, beta_hat) of the monic cubic u^3 + k_hat u^2 + u + beta_hat."""

    k_hat: float
    beta_hat: float
    source: DiodeParams | None = None

    def __iter__(self):
        yield self.k_hat
        yield self.beta_hat


@dataclass(frozen=True)
class GammaParam:
    gamma: float


def scale_params(p: DiodeParams) -> ScaledParams:
    if p.j_x == 0:
        raise DomainError("scaling undefined for j_x = 0")
    return ScaledParams(p.k / (8.0 * p.j_x), 4.0 * p.beta_phi**2 / (8.0 * p.j_x), p)


def gamma_of(p: DiodeParams) -> GammaParam:
    if p.j_x <= 0:
        raise DomainError("gamma needs j_x > 0")
    return GammaParam(p.beta_a**2 / (2.0 * p.j_x))


def theta_anode(phi_L: float, a_L: float) -> float:
    """Effective potential at the anode; negative means the diode is insulated."""
    return (1.0 + phi_L) ** 2 - 1.0 - a_L**2


def as_pair(sp) -> tuple[float, float]:
    """Accept a ScaledParams or a plain (k_hat, beta_hat) pair."""
    if isinstance(sp, ScaledParams):
        return float(sp.k_hat), float(sp.beta_hat)
    k_hat, beta_hat = sp
    return float(k_hat), float(beta_hat)
