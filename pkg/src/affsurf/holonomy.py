"""Holonomy characters and complex turning numbers on explicit loops.

For a loop avoiding the cone points, the holonomy of the flat line field is

    chi(gamma) = exp(-contour integral of Gamma over gamma)

and the turning number measured against the connection is

    tau(gamma) = wind(gamma') - (1/2 pi i) * contour integral of Gamma,

the velocity winding minus the same period, so e^{2 pi i tau} = chi always.
A small positive circle around a cone point of order m gives chi = e^{2 pi i m}
and tau = m + 1.

Loops come in four kinds: analytic circles (exact derivative, winding =
orientation), closed sample polylines (winding from central differences fed
through continuous_log), and the two lattice loops of a genus-1 surface
(straight segments from a basepoint to basepoint + 1 or + tau; they close up
on the torus with constant velocity, so their winding is 0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EvaluationAtConePoint, InvalidSpec, ZeroDerivativeSample
from .jsonio import as_complex, check_fields, pair
from .numerics import (
    LineSegment,
    circle_segments,
    continuous_log,
    integrate,
    segments_from_points,
)
from .surface import connection_form, cone_clearance, ensure_valid, torus_distance

_MIN_SAMPLES = 16


@dataclass(frozen=True)
class LoopPath:
    kind: str
    center: complex | None = None
    radius: float | None = None
    orientation: int = 1
    points: tuple | None = None
    basepoint: complex | None = None
    name: str | None = None

    @classmethod
    def circle(cls, center, radius, orientation=1, name=None):
        assert radius > 0 and orientation in (1, -1)
        return cls("circle", center=complex(center), radius=float(radius),
                   orientation=orientation, name=name)

    @classmethod
    def samples(cls, points, name=None):
        pts = tuple(complex(p) for p in points)
        if len(pts) < _MIN_SAMPLES:
            raise InvalidSpec(f"sampled loops need >= {_MIN_SAMPLES} points, got {len(pts)}")
        scale = max(1.0, max(abs(p) for p in pts))
        if abs(pts[0] - pts[-1]) > 1e-9 * scale:
            raise InvalidSpec("sampled loop is not closed (first != last)")
        return cls("samples", points=pts, name=name)

    @classmethod
    def lattice_a(cls, basepoint, name=None):
        return cls("lattice_a", basepoint=complex(basepoint), name=name or "lat_a")

    @classmethod
    def lattice_b(cls, basepoint, name=None):
        return cls("lattice_b", basepoint=complex(basepoint), name=name or "lat_b")


@dataclass(frozen=True)
class HolonomyReport:
    chi: dict
    turning: dict
    framing_defect: float
    cone_product_defect: float

    @property
    def consistent(self):
        return self.framing_defect <= 1e-9 and self.cone_product_defect <= 1e-9


def loop_segments(spec, loop):
    if loop.kind == "circle":
        return circle_segments(loop.center, loop.radius, loop.orientation)
    if loop.kind == "samples":
        return segments_from_points(loop.points)
    if loop.kind in ("lattice_a", "lattice_b"):
        if spec.genus != 1:
            raise InvalidSpec("lattice loops need a genus-1 spec")
        step = 1.0 if loop.kind == "lattice_a" else spec.tau
        return [LineSegment(loop.basepoint, loop.basepoint + step)]
    raise InvalidSpec(f"unknown loop kind {loop.kind!r}")


def _point_segment_distance(p, a, b):
    d = b - a
    if d == 0:
        return abs(p - a)
    t = min(1.0, max(0.0, ((p - a) * np.conj(d)).real / abs(d) ** 2))
    return abs(p - (a + t * d))


def _point_arc_distance(p, arc):
    rel = p - arc.center
    lo, hi = sorted((arc.theta0, arc.theta1))
    ang = np.angle(rel)
    ang -= 2 * np.pi * np.floor((ang - lo) / (2 * np.pi))
    if ang <= hi:
        return abs(abs(rel) - arc.radius)
    ends = (arc.center + arc.radius * np.exp(1j * arc.theta0),
            arc.center + arc.radius * np.exp(1j * arc.theta1))
    return min(abs(p - e) for e in ends)


def path_cone_clearance(spec, segments):
    """Exact geometric distance from a contour to the nearest cone point
    (including lattice translates at genus 1).  Quadrature nodes never land
    exactly on a pole, so rejecting loops through cone points needs this
    check rather than pointwise evaluation guards."""
    if not spec.cone_points:
        return np.inf
    targets = list(spec.positions)
    if spec.genus == 1:
        targets = [c + off for c in spec.positions for off in _translate_offsets(spec.tau)]
    best = np.inf
    for seg in segments:
        for p in targets:
            if isinstance(seg, LineSegment):
                d = _point_segment_distance(p, seg.z0, seg.z1)
            else:
                d = _point_arc_distance(p, seg)
            best = min(best, d)
    return best


def log_holonomy(spec, loop, quadrature=None):
    """-contour integral of Gamma; exp of this is the holonomy character."""
    gamma = connection_form(spec)
    segs = loop_segments(spec, loop)
    if path_cone_clearance(spec, segs) < 1e-12:
        raise EvaluationAtConePoint("loop passes through a cone point")
    return -integrate(gamma, segs, quadrature)


def holonomy(spec, loop, quadrature=None):
    return np.exp(log_holonomy(spec, loop, quadrature))


def _sampled_winding(points):
    pts = np.asarray(points, dtype=complex)
    pts = pts[:-1]  # closed: last duplicates first
    if pts.size < 3:
        raise InvalidSpec("winding needs at least 3 distinct samples")
    deriv = (np.roll(pts, -1) - np.roll(pts, 1)) * 0.5
    scale = np.max(np.abs(deriv))
    if scale == 0 or np.min(np.abs(deriv)) <= 1e-15 * scale:
        raise ZeroDerivativeSample("a sample has vanishing discrete velocity")
    logs = continuous_log(np.append(deriv, deriv[0]))
    return (logs[-1] - logs[0]) / (2j * np.pi)


def velocity_winding(spec, loop):
    """wind(gamma'): orientation for circles, 0 for lattice segments (their
    velocity is constant), central-difference winding for sampled loops."""
    if loop.kind == "circle":
        return complex(loop.orientation)
    if loop.kind in ("lattice_a", "lattice_b"):
        return 0j
    return _sampled_winding(loop.points)


def turning_number(spec, loop, quadrature=None):
    period = -log_holonomy(spec, loop, quadrature)
    return velocity_winding(spec, loop) + (-period) / (2j * np.pi)


def _translate_offsets(tau):
    return np.array([m + n * tau for m in (-2, -1, 0, 1, 2)
                     for n in (-2, -1, 0, 1, 2)], dtype=complex)


def _segment_distance(points, a, b):
    """Min distance from each point to segment [a, b]."""
    d = b - a
    t = np.clip(((points - a) * np.conj(d)).real / abs(d) ** 2, 0.0, 1.0)
    return np.abs(points - (a + t * d))


def _lattice_basepoint(spec):
    """Deterministic basepoint whose two lattice segments stay as far as
    possible from every cone point translate."""
    tau = spec.tau
    if not spec.cone_points:
        return 0.11 + 0.13 * tau
    translates = (spec.positions[:, None] + _translate_offsets(tau)).ravel()
    best, best_score = None, -1.0
    for x in np.linspace(0.04, 0.96, 13):
        for y in np.linspace(0.04, 0.96, 13):
            z0 = x + y * tau
            score = min(
                _segment_distance(translates, z0, z0 + 1.0).min(),
                _segment_distance(translates, z0, z0 + tau).min(),
            )
            if score > best_score + 1e-15:
                best, best_score = z0, score
    return best


def cone_circle(spec, j, scale=0.3):
    """Small positive circle around cone point j, radius a fraction of the
    distance to the nearest other cone point (or lattice translate)."""
    c = spec.cone_points[j].position
    dists = []
    for k, p in enumerate(spec.cone_points):
        if k == j:
            if spec.genus == 1:
                dists.append(min(abs(v) for v in _translate_offsets(spec.tau) if v != 0))
            continue
        if spec.genus == 0:
            dists.append(abs(c - p.position))
        else:
            dists.append(torus_distance(c, p.position, spec.tau))
    radius = scale * min(dists) if dists else 1.0
    return LoopPath.circle(c, radius, name=f"cone_{j}")


def standard_basis(spec):
    """Cone circles (one per cone point) plus, at genus 1, the two lattice
    loops from a clearance-maximizing basepoint."""
    ensure_valid(spec)
    loops = [cone_circle(spec, j) for j in range(len(spec.cone_points))]
    if spec.genus == 1:
        z0 = _lattice_basepoint(spec)
        loops.append(LoopPath.lattice_a(z0))
        loops.append(LoopPath.lattice_b(z0))
    return loops


def character_on_basis(spec, basis=None, quadrature=None):
    basis = standard_basis(spec) if basis is None else list(basis)
    chi, turning = {}, {}
    for k, loop in enumerate(basis):
        name = loop.name or f"loop_{k}"
        chi[name] = holonomy(spec, loop, quadrature)
        turning[name] = turning_number(spec, loop, quadrature)
    framing = max(
        (abs(np.exp(2j * np.pi * turning[k]) - chi[k]) for k in chi), default=0.0)
    cone_chis = [v for k, v in chi.items() if k.startswith("cone_")]
    product = np.prod(cone_chis) if cone_chis else 1.0
    return HolonomyReport(chi, turning, float(framing), float(abs(product - 1.0)))


def is_translation_surface(spec, quadrature=None, tol=1e-9):
    """Classify: not_translation / finite_area / infinite_area.

    Translation means the full holonomy character is trivial on the standard
    basis; among translations, a pole of the flat form (some Re m_j <= -1)
    makes the area infinite."""
    report = character_on_basis(spec, quadrature=quadrature)
    if any(abs(v - 1.0) > tol for v in report.chi.values()):
        return "not_translation"
    if any(p.order.real <= -1 + tol for p in spec.cone_points):
        return "infinite_area"
    return "finite_area"


# --- JSON format -------------------------------------------------------------

def loop_from_json(obj):
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValueError("loop: expected an object with a 'kind' field")
    kind = obj["kind"]
    if kind == "circle":
        check_fields(obj, "loop", required=("kind", "center", "radius", "orientation"))
        radius = obj["radius"]
        if not isinstance(radius, (int, float)) or isinstance(radius, bool) or radius <= 0:
            raise ValueError(f"loop.radius: expected a positive number, got {radius!r}")
        if obj["orientation"] not in (1, -1):
            raise ValueError("loop.orientation: expected 1 or -1")
        return LoopPath.circle(as_complex(obj["center"], "loop.center"),
                               float(radius), obj["orientation"])
    if kind == "samples":
        check_fields(obj, "loop", required=("kind", "points"))
        if not isinstance(obj["points"], list):
            raise ValueError("loop.points: expected a list")
        pts = [as_complex(p, f"loop.points[{i}]") for i, p in enumerate(obj["points"])]
        return LoopPath.samples(pts)
    if kind in ("lattice_a", "lattice_b"):
        check_fields(obj, "loop", required=("kind", "basepoint"))
        base = as_complex(obj["basepoint"], "loop.basepoint")
        return LoopPath.lattice_a(base) if kind == "lattice_a" else LoopPath.lattice_b(base)
    raise ValueError(f"loop.kind: unknown kind {kind!r}")


def loop_to_json(loop):
    if loop.kind == "circle":
        return {"kind": "circle", "center": pair(loop.center),
                "radius": loop.radius, "orientation": loop.orientation}
    if loop.kind == "samples":
        return {"kind": "samples", "points": [pair(p) for p in loop.points]}
    return {"kind": loop.kind, "basepoint": pair(loop.basepoint)}
