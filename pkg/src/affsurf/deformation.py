"""Finite-difference calculus on families of affine surfaces.

A family is a base spec plus a list of directions, each one complex
parameter: moving a cone point, trading order between two points,
shifting lambda, or shifting tau.  Holonomy logs and projective residue
charts are differentiated by central differences, ranks are read off
singular values, and isoresidual leaves are walked by stepping along
the kernel and correcting with Newton's method.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    InvalidDirection,
    NewtonDivergence,
    NotInAdmissibleLocus,
    StepCollision,
    ZeroKernel,
)
from .holonomy import (
    is_translation_surface,
    log_holonomy,
    loop_segments,
    path_cone_clearance,
    standard_basis,
)
from .jsonio import check_fields
from .residues import res_gamma
from .surface import (
    AffineSurfaceSpec,
    ConePoint,
    ensure_valid,
    integral_pole_indices,
    spec_from_json,
    spec_to_json,
    validate,
)

_DEFAULT_STEP = 1e-5
_RANK_RTOL = 1e-6
_LEAF_TOL = 1e-7


@dataclass(frozen=True)
class MovePoint:
    index: int

    def check(self, spec):
        if not 0 <= self.index < len(spec.cone_points):
            raise InvalidDirection(f"no cone point {self.index}")
        if spec.genus == 1 and self.index == 0:
            raise InvalidDirection(
                "cone point 0 is pinned at the origin at genus 1")

    def apply(self, spec, coeff):
        pts = list(spec.cone_points)
        p = pts[self.index]
        pts[self.index] = ConePoint(p.position + coeff, p.order)
        return replace(spec, cone_points=tuple(pts))

    def touches(self, indices):
        return self.index in indices

    def as_json(self):
        return {"kind": "move_point", "index": self.index}


@dataclass(frozen=True)
class OrderPair:
    plus: int
    minus: int

    def check(self, spec):
        n = len(spec.cone_points)
        if not (0 <= self.plus < n and 0 <= self.minus < n):
            raise InvalidDirection(
                f"order pair ({self.plus}, {self.minus}) out of range")
        if self.plus == self.minus:
            raise InvalidDirection("order pair needs two distinct points")

    def apply(self, spec, coeff):
        pts = list(spec.cone_points)
        a, b = pts[self.plus], pts[self.minus]
        pts[self.plus] = ConePoint(a.position, a.order + coeff)
        pts[self.minus] = ConePoint(b.position, b.order - coeff)
        return replace(spec, cone_points=tuple(pts))

    def touches(self, indices):
        return self.plus in indices or self.minus in indices

    def as_json(self):
        return {"kind": "order_pair", "plus": self.plus, "minus": self.minus}


@dataclass(frozen=True)
class LambdaShift:

    def check(self, spec):
        if spec.genus != 1:
            raise InvalidDirection("lambda exists only at genus 1")

    def apply(self, spec, coeff):
        return replace(spec, lam=spec.lam + coeff)

    def touches(self, indices):
        return False

    def as_json(self):
        return {"kind": "lambda"}


@dataclass(frozen=True)
class TauShift:

    def check(self, spec):
        if spec.genus != 1:
            raise InvalidDirection("tau exists only at genus 1")

    def apply(self, spec, coeff):
        return replace(spec, tau=spec.tau + coeff)

    def touches(self, indices):
        return False

    def as_json(self):
        return {"kind": "tau"}


@dataclass(frozen=True)
class SpecFamily:
    base: AffineSurfaceSpec
    directions: tuple

    def __post_init__(self):
        ensure_valid(self.base)
        assert len(self.directions) > 0, "a family needs at least one direction"
        for direction in self.directions:
            direction.check(self.base)

    @property
    def dim(self):
        return len(self.directions)

    def perturbed(self, coeffs):
        """The surface at parameter vector coeffs (one complex per direction).

        Raises StepCollision when the perturbation breaks validity, which
        for order-preserving directions means cone points collided or tau
        left the upper half plane.
        """
        coeffs = np.asarray(coeffs, dtype=complex)
        assert coeffs.shape == (self.dim,)
        spec = self.base
        for direction, c in zip(self.directions, coeffs):
            if c != 0:
                spec = direction.apply(spec, complex(c))
        report = validate(spec)
        if not report.ok:
            raise StepCollision("; ".join(report.problems))
        return spec


@dataclass(frozen=True)
class RankReport:
    matrix: object          # complex Jacobian, observables x directions
    singular_values: object
    rank: int
    threshold: float
    verdict: str            # submersion | rank_deficient
    hol_rank: int | None = None
    res_rank: int | None = None


def _rank_of(matrix, threshold=None):
    """Numerical rank; threshold defaults to relative, but blocks of a
    larger matrix must pass the full matrix's threshold or a noise-only
    block would rank full against its own scale."""
    if matrix.size == 0:
        return 0, np.zeros(0), 0.0
    s = np.linalg.svd(matrix, compute_uv=False)
    if threshold is None:
        threshold = _RANK_RTOL * s[0]
    return int(np.sum(s > threshold)), s, float(threshold)


def _hol_values(spec, loops, h, quadrature):
    values = []
    for loop in loops:
        segments = loop_segments(spec, loop)
        if path_cone_clearance(spec, segments) < max(1e-9, 2.0 * h):
            raise StepCollision(
                "a perturbed cone point comes too close to a basis loop")
        values.append(log_holonomy(spec, loop, quadrature))
    return np.array(values, dtype=complex)


def _residue_chart(spec, tree, pivot, quadrature):
    raw = np.asarray(
        res_gamma(spec, tree, quadrature, projective=False).values)
    return np.delete(raw, pivot) / raw[pivot]


def _observables(spec, loops, tree, pivot, h, quadrature):
    logs = _hol_values(spec, loops, h, quadrature)
    if tree is None:
        return logs
    return np.concatenate([logs, _residue_chart(spec, tree, pivot,
                                                quadrature)])


def _jacobian(family, loops, tree, pivot, h, quadrature, jobs=None):
    """Central differences, one complex column per direction.

    Columns never share accumulators, so the result is bitwise identical
    however many workers evaluate them.
    """
    def column(j):
        coeffs = np.zeros(family.dim, dtype=complex)
        coeffs[j] = h
        upper = _observables(family.perturbed(coeffs), loops, tree, pivot,
                             h, quadrature)
        coeffs[j] = -h
        lower = _observables(family.perturbed(coeffs), loops, tree, pivot,
                             h, quadrature)
        return (upper - lower) / (2.0 * h)

    if jobs is not None and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            columns = list(pool.map(column, range(family.dim)))
    else:
        columns = [column(j) for j in range(family.dim)]
    return np.column_stack(columns)


def hol_jacobian(family, loops=None, h=_DEFAULT_STEP, quadrature=None,
                 jobs=None):
    """Derivative of the holonomy logs on the given loops along the family.

    Logs come straight from the contour integral, so branches track the
    parameters continuously and no unwrapping is needed.
    """
    loops = standard_basis(family.base) if loops is None else list(loops)
    assert loops, "need at least one loop"
    jac = _jacobian(family, loops, None, None, h, quadrature, jobs)
    rank, s, threshold = _rank_of(jac)
    verdict = "submersion" if rank == min(jac.shape) else "rank_deficient"
    return RankReport(jac, s, rank, threshold, verdict)


def _admissible_base(family, tree, quadrature):
    kind = is_translation_surface(family.base, quadrature=quadrature)
    if kind != "not_translation":
        raise NotInAdmissibleLocus(
            f"base is a {kind.replace('_', '-')} translation surface")
    poles = set(integral_pole_indices(family.base))
    for direction in family.directions:
        if direction.touches(poles):
            raise InvalidDirection(
                "direction moves an integral pole; the arc tree is "
                "anchored there")
    # raises AllResiduesZero when every coordinate vanishes, which is
    # exactly the locus the foliation excludes
    raw = np.asarray(
        res_gamma(family.base, tree, quadrature, projective=False).values)
    return int(np.argmax(np.abs(raw)))


def hol_res_jacobian(family, tree, loops=None, h=_DEFAULT_STEP,
                     quadrature=None, jobs=None):
    """Derivative of holonomy logs stacked over the affine residue chart.

    The chart divides out the coordinate of largest base modulus, fixed
    once at the base so every difference quotient uses the same chart.
    """
    loops = standard_basis(family.base) if loops is None else list(loops)
    assert loops, "need at least one loop"
    pivot = _admissible_base(family, tree, quadrature)
    jac = _jacobian(family, loops, tree, pivot, h, quadrature, jobs)
    rank, s, threshold = _rank_of(jac)
    hol_rank = _rank_of(jac[:len(loops)], threshold)[0]
    res_rank = _rank_of(jac[len(loops):], threshold)[0]
    verdict = "submersion" if rank == min(jac.shape) else "rank_deficient"
    return RankReport(jac, s, rank, threshold, verdict, hol_rank, res_rank)


def projective_distance(u, v):
    """Fubini-Study distance between the lines spanned by u and v."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    assert nu > 0 and nv > 0
    overlap = min(1.0, abs(np.vdot(u, v)) / (nu * nv))
    return float(np.arccos(overlap))


def isoresidual_family(spec):
    """The stratum directions available for leaf walking: every movable
    non-pole cone point, plus lambda and tau at genus 1."""
    poles = set(integral_pole_indices(spec))
    directions = []
    for j in range(len(spec.cone_points)):
        if j in poles or (spec.genus == 1 and j == 0):
            continue
        directions.append(MovePoint(j))
    if spec.genus == 1:
        directions.extend([LambdaShift(), TauShift()])
    if not directions:
        raise ZeroKernel("no stratum directions: every cone point is "
                         "an anchored pole")
    return SpecFamily(spec, tuple(directions))


def _chart_to_line(chart, pivot):
    return np.insert(np.asarray(chart, dtype=complex), pivot, 1.0)


def _kernel_basis(jac):
    u, s, vh = np.linalg.svd(jac)
    if s.size == 0:
        return np.eye(jac.shape[1], dtype=complex)
    rank = int(np.sum(s > _RANK_RTOL * s[0]))
    return vh[rank:].conj().T


def leaf_step(spec, tree, step, directions=None, loops=None,
              h=_DEFAULT_STEP, quadrature=None, max_newton=10):
    """One step along the isoresidual leaf through spec.

    Moves by step times a unit kernel vector of the combined map, then
    Newton-corrects (pseudo-inverse of the Jacobian at the current
    iterate) until holonomy logs match to 1e-7 and the projective
    residue moved by at most 1e-7.
    """
    ensure_valid(spec)
    if step == 0:
        return spec
    family = (isoresidual_family(spec) if directions is None
              else SpecFamily(spec, tuple(directions)))
    loops = standard_basis(spec) if loops is None else list(loops)
    pivot = _admissible_base(family, tree, quadrature)
    target = _observables(spec, loops, tree, pivot, h, quadrature)
    target_line = _chart_to_line(target[len(loops):], pivot)

    jac = _jacobian(family, loops, tree, pivot, h, quadrature)
    kernel = _kernel_basis(jac)
    if kernel.shape[1] == 0:
        raise ZeroKernel("the leaf through this surface is a point")
    direction = kernel[:, 0]
    # rotate the phase so the dominant component is positive real: the
    # walk direction then varies continuously along composed steps
    lead = direction[int(np.argmax(np.abs(direction)))]
    direction = direction * (abs(lead) / lead)

    coeffs = step * direction
    for _ in range(max_newton + 1):
        current = family.perturbed(coeffs)
        values = _observables(current, loops, tree, pivot, h, quadrature)
        hol_err = float(np.max(np.abs(values[:len(loops)]
                                      - target[:len(loops)])))
        res_err = projective_distance(
            _chart_to_line(values[len(loops):], pivot), target_line)
        if hol_err <= _LEAF_TOL and res_err <= _LEAF_TOL:
            return current
        jac = _jacobian(SpecFamily(current, family.directions), loops,
                        tree, pivot, h, quadrature)
        update = np.linalg.pinv(jac, rcond=_RANK_RTOL) @ (values - target)
        coeffs = coeffs - update
    raise NewtonDivergence(
        f"leaf constraints not met after {max_newton} corrections "
        f"(holonomy {hol_err:.2e}, residue {res_err:.2e})")


def on_same_leaf(spec_a, spec_b, tree, tol, loops=None, quadrature=None,
                 h=_DEFAULT_STEP):
    """Whether two surfaces agree in holonomy and projective residues,
    both measured through the same tree and loop set."""
    loops = standard_basis(spec_a) if loops is None else list(loops)
    raw_a = np.asarray(
        res_gamma(spec_a, tree, quadrature, projective=False).values)
    pivot = int(np.argmax(np.abs(raw_a)))
    a = _observables(spec_a, loops, tree, pivot, h, quadrature)
    b = _observables(spec_b, loops, tree, pivot, h, quadrature)
    k = len(loops)
    hol_err = float(np.max(np.abs(a[:k] - b[:k])))
    res_err = projective_distance(_chart_to_line(a[k:], pivot),
                                  _chart_to_line(b[k:], pivot))
    return hol_err <= tol and res_err <= tol


# --- JSON format -----------------------------------------------------------

_DIRECTION_KINDS = {"move_point", "order_pair", "lambda", "tau"}


def _direction_from_json(obj, where):
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValueError(f"{where}: expected an object with a 'kind'")
    kind = obj["kind"]
    if kind == "move_point":
        check_fields(obj, where, required=("kind", "index"))
        if not isinstance(obj["index"], int) or isinstance(obj["index"], bool):
            raise ValueError(f"{where}.index: expected an integer")
        return MovePoint(obj["index"])
    if kind == "order_pair":
        check_fields(obj, where, required=("kind", "plus", "minus"))
        for key in ("plus", "minus"):
            if not isinstance(obj[key], int) or isinstance(obj[key], bool):
                raise ValueError(f"{where}.{key}: expected an integer")
        return OrderPair(obj["plus"], obj["minus"])
    if kind == "lambda":
        check_fields(obj, where, required=("kind",))
        return LambdaShift()
    if kind == "tau":
        check_fields(obj, where, required=("kind",))
        return TauShift()
    raise ValueError(f"{where}.kind: expected one of "
                     f"{sorted(_DIRECTION_KINDS)}, got {kind!r}")


def family_from_json(obj):
    check_fields(obj, "family", required=("base", "directions"))
    base = spec_from_json(obj["base"])
    if not isinstance(obj["directions"], list) or not obj["directions"]:
        raise ValueError("family.directions: expected a nonempty list")
    directions = tuple(
        _direction_from_json(d, f"family.directions[{k}]")
        for k, d in enumerate(obj["directions"]))
    return SpecFamily(base, directions)


def family_to_json(family):
    return {"base": spec_to_json(family.base),
            "directions": [d.as_json() for d in family.directions]}
