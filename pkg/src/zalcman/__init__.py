"""Rescaling limits, Poincare functions and Julia/Mandelbrot similarity for z^d + c."""

from .compact import Frame, GridSet, affine_rescale, hausdorff_distance, truncate
from .dyn import (
    MembershipVerdict,
    OrbitTrace,
    UnicriticalMap,
    iterate,
    julia_membership,
    mandelbrot_membership,
    orbit_with_derivative,
    param_orbit_with_derivative,
    postcritical_orbit,
)
from .orbits import (
    MisiurewiczData,
    PeriodicOrbit,
    PoincareChart,
    find_periodic,
    misiurewicz_data,
    poincare_chart,
    poincare_eval,
)

__all__ = [
    "Frame", "GridSet", "affine_rescale", "hausdorff_distance", "truncate",
    "MembershipVerdict", "OrbitTrace", "UnicriticalMap", "iterate", "julia_membership",
    "mandelbrot_membership", "orbit_with_derivative", "param_orbit_with_derivative", "postcritical_orbit",
    "MisiurewiczData", "PeriodicOrbit", "PoincareChart", "find_periodic", "misiurewicz_data",
    "poincare_chart", "poincare_eval",
]
