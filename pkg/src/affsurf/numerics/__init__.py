from .quadrature import (
    Quadrature,
    LineSegment,
    ArcSegment,
    segments_from_points,
    circle_segments,
    integrate,
    continuous_log,
    cauchy_residue,
)
from .weierstrass import (
    LatticeData,
    lattice_data,
    weierstrass_sigma,
    weierstrass_zeta,
    quasi_periods,
)

__all__ = [
    "Quadrature",
    "LineSegment",
    "ArcSegment",
    "segments_from_points",
    "circle_segments",
    "integrate",
    "continuous_log",
    "cauchy_residue",
    "LatticeData",
    "lattice_data",
    "weierstrass_sigma",
    "weierstrass_zeta",
    "quasi_periods",
]
