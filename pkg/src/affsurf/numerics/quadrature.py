"""Contour integration and branch tracking in the complex plane.

Integrands are callables f(z) that accept a complex ndarray and return an
ndarray of the same shape.  Contours are lists of segments (straight lines
and circular arcs); each segment is integrated by 16-point Gauss-Legendre
panels with adaptive bisection until the whole-vs-halves discrepancy falls
below the requested absolute tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import BranchJump, NonFiniteEvaluation, ToleranceNotReached

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class Quadrature:
    """Tolerance knobs for adaptive contour integration.

    abs_tol: absolute tolerance per contour (split evenly over segments).
    max_refinements: bisection depth cap per segment; exceeding it raises
        ToleranceNotReached rather than returning a bad value.
    """

    abs_tol: float = 1e-10
    max_refinements: int = 24


@dataclass(frozen=True)
class LineSegment:
    z0: complex
    z1: complex

    def at(self, t):
        """Point and parameter-derivative at t in [0, 1]."""
        d = self.z1 - self.z0
        return self.z0 + t * d, np.full_like(t, d, dtype=complex)


@dataclass(frozen=True)
class ArcSegment:
    """Circular arc center + radius*exp(i*theta), theta from theta0 to theta1.

    Orientation is carried by the sign of theta1 - theta0.
    """

    center: complex
    radius: float
    theta0: float
    theta1: float

    def at(self, t):
        sweep = self.theta1 - self.theta0
        theta = self.theta0 + t * sweep
        e = np.exp(1j * theta)
        return self.center + self.radius * e, 1j * self.radius * sweep * e


def segments_from_points(points):
    """Polyline through the given complex points, one LineSegment per edge."""
    pts = [complex(p) for p in points]
    assert len(pts) >= 2, "a polyline needs at least two points"
    return [LineSegment(pts[k], pts[k + 1]) for k in range(len(pts) - 1)]


def circle_segments(center, radius, orientation=1, n_arcs=8, theta_start=0.0):
    """Full circle as n_arcs equal arcs, counterclockwise for orientation=+1."""
    assert radius > 0
    assert orientation in (1, -1)
    step = orientation * 2.0 * np.pi / n_arcs
    return [
        ArcSegment(complex(center), float(radius),
                   theta_start + k * step, theta_start + (k + 1) * step)
        for k in range(n_arcs)
    ]


def _eval(f, z):
    vals = np.asarray(f(z), dtype=complex)
    if vals.shape != z.shape:
        raise NonFiniteEvaluation(
            f"integrand returned shape {vals.shape} for input shape {z.shape}")
    bad = ~np.isfinite(vals)
    if bad.any():
        where = z[bad].ravel()[0]
        raise NonFiniteEvaluation(f"integrand not finite at z = {where}")
    return vals


def _panel(f, segment, u, v):
    """One 16-point Gauss-Legendre panel over parameter window [u, v].

    Returns the panel value and the sum of term magnitudes; the latter sets
    the rounding floor below which a discrepancy is numerical noise.
    """
    half = 0.5 * (v - u)
    t = (u + half) + half * _NODES
    z, dz = segment.at(t)
    vals = _eval(f, z)
    terms = _WEIGHTS * vals * dz
    return half * np.sum(terms), abs(half) * np.sum(np.abs(terms))


def _adaptive_segment(f, segment, tol, max_depth):
    """Bisect [0, 1] until whole-vs-halves agree within the window's share
    of tol (or within the float rounding floor of the panel sums)."""
    total = 0.0 + 0.0j
    stack = [(0.0, 1.0, 0)]
    while stack:
        u, v, depth = stack.pop()
        whole, _ = _panel(f, segment, u, v)
        mid = 0.5 * (u + v)
        left, scale_l = _panel(f, segment, u, mid)
        right, scale_r = _panel(f, segment, mid, v)
        floor = 1e-15 * (scale_l + scale_r)
        if abs(whole - (left + right)) <= max(tol * (v - u), floor):
            total += left + right
        elif depth + 1 > max_depth:
            raise ToleranceNotReached(
                f"refinement cap {max_depth} hit on {segment!r} "
                f"over parameter window [{u}, {v}]")
        else:
            stack.append((u, mid, depth + 1))
            stack.append((mid, v, depth + 1))
    return total


def integrate(f, segments, quadrature=None):
    """Integral of f along the chained segments.

    f must accept a complex ndarray and return values of the same shape;
    non-finite values raise NonFiniteEvaluation with the offending point.
    """
    quadrature = quadrature or Quadrature()
    segs = list(segments)
    assert segs, "empty contour"
    tol_seg = quadrature.abs_tol / len(segs)
    return sum(
        _adaptive_segment(f, s, tol_seg, quadrature.max_refinements)
        for s in segs
    )


def continuous_log(values):
    """Branch-tracked logarithm along a sequence of nonzero complex values.

    The first entry gets its principal log; each later entry gets the branch
    closest to its predecessor.  Consecutive arguments must move by less
    than pi: at pi the jump direction is ambiguous, so BranchJump is raised
    (threshold pi, with a 1e-9 relative guard for float rounding at the
    boundary).
    """
    vals = np.asarray(values, dtype=complex).ravel()
    assert vals.size >= 1, "continuous_log needs at least one value"
    if (vals == 0).any() or not np.isfinite(vals).all():
        raise NonFiniteEvaluation("continuous_log input has zeros or non-finite values")
    out = np.empty(vals.shape, dtype=complex)
    out[0] = np.log(vals[0])
    if vals.size > 1:
        steps = np.log(vals[1:] / vals[:-1])
        jumps = np.abs(steps.imag) >= np.pi * (1.0 - 1e-9)
        if jumps.any():
            k = int(np.argmax(jumps)) + 1
            raise BranchJump(
                f"argument moved by >= pi between samples {k - 1} and {k}")
        out[1:] = out[0] + np.cumsum(steps)
    return out


def cauchy_residue(f, center, radius, quadrature=None):
    """(1/2pi i) * integral of f over the positively oriented circle."""
    ring = circle_segments(center, radius, orientation=1)
    return integrate(f, ring, quadrature) / (2j * np.pi)
