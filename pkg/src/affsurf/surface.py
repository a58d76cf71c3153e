"""Affine-surface specs at genus 0 and 1.

A spec is the triple (underlying surface, cone points with complex orders,
connection), flattened to plain data: genus, cone positions c_j with orders
m_j, and at genus 1 the modulus tau and the free parameter lambda picking the
connection out of the affine line of possibilities.  The connection form is

    genus 0:   Gamma(z) = sum_j (-m_j) / (z - c_j)
    genus 1:   Gamma(z) = lambda + sum_j (-m_j) * zeta(z - c_j; tau)

so that the order at c_j is -Res_{c_j} of the connection, and flat sections
of the dual line field satisfy f'/f = -Gamma.  Angle-defect bookkeeping
(sum of orders = 2g - 2) is what validate enforces; at genus 1 ellipticity
of Gamma is automatic from the zero order sum.

Conventions: infinity is never a cone point at genus 0 (one global chart);
at genus 1 the first cone point sits at 0, positions live mod the lattice
Z + tau*Z, and both tau and lambda are required.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import EvaluationAtConePoint, InvalidSpec, ResidueSumNonzero
from .jsonio import as_complex, check_fields, pair
from .numerics import integrate, segments_from_points
from .numerics.weierstrass import lattice_data, weierstrass_zeta

_CONE_CLEARANCE = 1e-12
_DISTINCT_TOL = 1e-9
_GAUSS_BONNET_TOL = 1e-12
_INTEGRAL_TOL = 1e-9


@dataclass(frozen=True)
class ConePoint:
    position: complex
    order: complex


@dataclass(frozen=True)
class AffineSurfaceSpec:
    genus: int
    cone_points: tuple
    tau: complex | None = None
    lam: complex | None = None

    @classmethod
    def genus0(cls, points):
        return cls(0, tuple(ConePoint(complex(c), complex(m)) for c, m in points))

    @classmethod
    def genus1(cls, tau, lam, points):
        return cls(1, tuple(ConePoint(complex(c), complex(m)) for c, m in points),
                   tau=complex(tau), lam=complex(lam))

    @property
    def positions(self):
        return np.array([p.position for p in self.cone_points], dtype=complex)

    @property
    def orders(self):
        return np.array([p.order for p in self.cone_points], dtype=complex)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    problems: tuple

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class NodeGluing:
    order_1: complex
    order_2: complex


def lattice_reduce(z, tau):
    """Representative of z mod Z + tau*Z with coordinates in [-1/2, 1/2)."""
    y = np.floor(np.imag(z) / tau.imag + 0.5)
    x = np.floor(np.real(z) - y * tau.real + 0.5)
    return z - x - y * tau


def torus_distance(a, b, tau):
    """Distance between a and b mod the lattice (min over nearby translates)."""
    d = lattice_reduce(a - b, tau)
    best = abs(d)
    for m in (-1, 0, 1):
        for n in (-1, 0, 1):
            best = min(best, abs(d + m + n * tau))
    return best


def validate(spec):
    """Check a spec's invariants; returns a report instead of raising."""
    problems = []
    if spec.genus not in (0, 1):
        problems.append(f"genus must be 0 or 1, got {spec.genus}")
        return ValidationReport(False, tuple(problems))
    if spec.genus == 0:
        if spec.tau is not None or spec.lam is not None:
            problems.append("genus 0 takes no tau or lambda")
    else:
        if spec.tau is None or spec.lam is None:
            problems.append("genus 1 needs both tau and lambda")
        elif not np.isfinite(spec.tau) or spec.tau.imag <= 0:
            problems.append(f"Im(tau) must be positive, got tau = {spec.tau}")
        elif not np.isfinite(spec.lam):
            problems.append("lambda must be finite")
    pos = spec.positions
    orders = spec.orders
    if pos.size and not (np.isfinite(pos).all() and np.isfinite(orders).all()):
        problems.append("cone data must be finite")
        return ValidationReport(False, tuple(problems))
    target = 2 * spec.genus - 2
    total = orders.sum() if orders.size else 0.0
    if abs(total - target) > _GAUSS_BONNET_TOL:
        problems.append(
            f"orders sum to {total}, expected 2g-2 = {target} (angle defect count)")
    if spec.genus == 1 and pos.size and not problems:
        if abs(pos[0]) > 1e-12:
            problems.append(
                f"first cone point must sit at 0 (translation normalization), got {pos[0]}")
        for j in range(len(pos)):
            for k in range(j + 1, len(pos)):
                if torus_distance(pos[j], pos[k], spec.tau) <= _DISTINCT_TOL:
                    problems.append(
                        f"cone points {j} and {k} coincide mod the lattice")
    elif spec.genus == 0:
        for j in range(len(pos)):
            for k in range(j + 1, len(pos)):
                if abs(pos[j] - pos[k]) <= _DISTINCT_TOL:
                    problems.append(f"cone points {j} and {k} coincide")
    return ValidationReport(not problems, tuple(problems))


def ensure_valid(spec):
    report = validate(spec)
    if report.ok:
        return spec
    joined = "; ".join(report.problems)
    if any("orders sum" in p for p in report.problems):
        raise ResidueSumNonzero(joined)
    raise InvalidSpec(joined)


def cone_clearance(spec, z):
    """Distance from z (array ok) to the nearest cone point, mod lattice at genus 1."""
    z = np.asarray(z, dtype=complex)
    if not spec.cone_points:
        return np.full(z.shape, np.inf) if z.shape else np.inf
    if spec.genus == 0:
        d = np.min(np.abs(z[..., None] - spec.positions), axis=-1)
    else:
        diff = lattice_reduce(z[..., None] - spec.positions, spec.tau)
        cands = [np.abs(diff + m + n * spec.tau)
                 for m in (-1, 0, 1) for n in (-1, 0, 1)]
        d = np.min(np.stack(cands, axis=0), axis=0).min(axis=-1)
    return d if d.shape else float(d)


def connection_form(spec):
    """Gamma as a vectorized callable; raises EvaluationAtConePoint within 1e-12."""
    ensure_valid(spec)
    positions = spec.positions
    neg_orders = -spec.orders
    genus, tau, lam = spec.genus, spec.tau, spec.lam

    def gamma(z):
        z = np.asarray(z, dtype=complex)
        if positions.size:
            clear = cone_clearance(spec, z)
            bad = np.asarray(clear) < _CONE_CLEARANCE
            if bad.any():
                at = z[bad].ravel()[0] if z.shape else z
                raise EvaluationAtConePoint(f"Gamma evaluated at cone point, z = {at}")
        if genus == 0:
            out = np.sum(neg_orders / (z[..., None] - positions), axis=-1)
        else:
            out = np.full(z.shape, lam, dtype=complex)
            if positions.size:
                out = out + np.sum(
                    neg_orders * weierstrass_zeta(z[..., None] - positions, tau),
                    axis=-1)
        return out

    return gamma


def flat_log_along(spec, points, quadrature=None):
    """-integral of Gamma along the polyline through points (log of the multiplier)."""
    pts = [complex(p) for p in points]
    if len(pts) < 2 or all(p == pts[0] for p in pts):
        return 0j
    gamma = connection_form(spec)
    return -integrate(gamma, segments_from_points(pts), quadrature)


def flat_multiplier(spec, points, quadrature=None):
    """exp(-int Gamma) along the polyline, i.e. f(end)/f(start) for flat f dz."""
    return np.exp(flat_log_along(spec, points, quadrature))


def exponential_action(spec, a, a0=0j):
    """Twist the connection: orders become m_j + a_j, lambda drops by a0.

    The coefficient vector must sum to zero (it is the residue tuple of the
    twisting one-form, and those residues always cancel).
    """
    ensure_valid(spec)
    a = [complex(x) for x in a]
    if len(a) != len(spec.cone_points):
        raise InvalidSpec(
            f"need one coefficient per cone point, got {len(a)} for {len(spec.cone_points)}")
    total = sum(a, 0j)
    if abs(total) > _GAUSS_BONNET_TOL:
        raise ResidueSumNonzero(f"twist coefficients sum to {total}, expected 0")
    if spec.genus == 0 and a0 != 0:
        raise InvalidSpec("a0 only applies at genus 1")
    new_points = tuple(
        ConePoint(p.position, p.order + da) for p, da in zip(spec.cone_points, a))
    out = replace(spec, cone_points=new_points)
    if spec.genus == 1:
        out = replace(out, lam=spec.lam - complex(a0))
    return ensure_valid(out)


def integral_pole_indices(spec):
    """Indices j with m_j a negative integer (within 1e-9), i.e. where the
    flat form is single-valued with a well-defined residue."""
    out = []
    for j, p in enumerate(spec.cone_points):
        nearest = round(p.order.real)
        if (abs(p.order - nearest) <= _INTEGRAL_TOL and nearest <= -1):
            out.append(j)
    return out


def check_node_gluing(gluing):
    """True iff the two branch orders sum to exactly -2.

    Exact equality on purpose: matched orders come from one meromorphic
    object on the normalization, so there is nothing to be tolerant about.
    """
    return complex(gluing.order_1) + complex(gluing.order_2) == -2


# --- JSON format -------------------------------------------------------------

def spec_from_json(obj):
    check_fields(obj, "surface", required=("genus", "cone_points"),
                 optional=("tau", "lambda"))
    genus = obj["genus"]
    if genus not in (0, 1):
        raise ValueError(f"surface.genus: expected 0 or 1, got {genus!r}")
    if not isinstance(obj["cone_points"], list):
        raise ValueError("surface.cone_points: expected a list")
    points = []
    for k, entry in enumerate(obj["cone_points"]):
        check_fields(entry, f"surface.cone_points[{k}]", required=("z", "order"))
        points.append((as_complex(entry["z"], f"cone_points[{k}].z"),
                       as_complex(entry["order"], f"cone_points[{k}].order")))
    if genus == 0:
        if "tau" in obj or "lambda" in obj:
            raise ValueError("surface: genus 0 takes no tau or lambda")
        return AffineSurfaceSpec.genus0(points)
    if "tau" not in obj or "lambda" not in obj:
        raise ValueError("surface: genus 1 needs both tau and lambda")
    return AffineSurfaceSpec.genus1(as_complex(obj["tau"], "surface.tau"),
                                    as_complex(obj["lambda"], "surface.lambda"),
                                    points)


def spec_to_json(spec):
    out = {"genus": spec.genus}
    if spec.genus == 1:
        out["tau"] = pair(spec.tau)
        out["lambda"] = pair(spec.lam)
    out["cone_points"] = [
        {"z": pair(p.position), "order": pair(p.order)} for p in spec.cone_points]
    return out
