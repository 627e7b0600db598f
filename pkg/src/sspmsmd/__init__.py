"""Strong-stability-preserving two-derivative Runge-Kutta methods."""

from .families import FAMILIES, FamilyMethod, make_family
from .integrator import evolve, step
from .spatial import make_semidiscretization
from .sspcert import build_shu_osher, check_certificate, find_ssp_coefficient
from .tableau import TwoDerivativeTableau, design_order, order_residuals

__all__ = [
    "FAMILIES",
    "FamilyMethod",
    "make_family",
    "evolve",
    "step",
    "make_semidiscretization",
    "build_shu_osher",
    "check_certificate",
    "find_ssp_coefficient",
    "TwoDerivativeTableau",
    "design_order",
    "order_residuals",
]

__version__ = "0.1.0"
