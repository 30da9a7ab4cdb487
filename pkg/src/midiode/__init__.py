"""Solution and bifurcation toolkit for the magnetically insulated planar diode."""

from .cubic import CubicRoots, DegenerateCubicError, oracle_roots, solve
from .model import DiodeParams, DomainError, GammaParam, NumericalError, ScaledParams, scale_params
from .thetad import classify_region, delta_zero_boundary, theta_branches

__version__ = "0.1.0"

__all__ = [
    "CubicRoots",
    "DegenerateCubicError",
    "DiodeParams",
    "DomainError",
    "GammaParam",
    "NumericalError",
    "ScaledParams",
    "classify_region",
    "delta_zero_boundary",
    "oracle_roots",
    "scale_params",
    "solve",
    "theta_branches",
]
