"""Residues of flat one-forms at integral poles, relative to a tree of arcs.

A flat one-form f dz (with f'/f = -Gamma) is generally multivalued, but near
a cone point whose order is a negative integer the local holonomy e^{2 pi i m}
is 1, so a branch chosen along an arc has a well-defined residue there.  The
residue tuple over all integral poles, taken relative to a tree of arcs from
a chosen root pole and up to one common scale, is the projectivized residue
map; changing one tree arc multiplies that arc's coordinate by the holonomy
of the cycle between old and new arcs, which is what keeps the fibers of
(holonomy, residues) well defined.

The germ is normalized to 1 at the first sample of the first listed arc
lying at distance >= 0.1 * (min pairwise cone distance) from the root.
Transport between arcs happens inside the punctured root disk, where path
choice cannot matter (the root's local holonomy is trivial).  Each residue
is one branch-tracked Cauchy circle: the circle is split into equal sub-arcs,
the transport factor accumulates across them, and the periodic trapezoid rule
sums f dz; the rule is spectrally accurate and the node count doubles until
two answers agree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AllResiduesZero,
    InvalidSpec,
    NotIntegralPole,
    NotTranslationSurface,
    ToleranceNotReached,
)
from .holonomy import _lattice_basepoint, is_translation_surface
from .jsonio import as_complex, check_fields, pair
from .numerics import ArcSegment, LineSegment, Quadrature, integrate
from .numerics.quadrature import _panel
from .surface import (
    connection_form,
    ensure_valid,
    integral_pole_indices,
    torus_distance,
)

_NORMALIZATION_FRACTION = 0.1


@dataclass(frozen=True)
class ArcTree:
    root_index: int
    arcs: tuple  # of (to_index, points tuple)

    @classmethod
    def build(cls, root_index, arcs):
        packed = tuple(
            (int(j), tuple(complex(p) for p in pts)) for j, pts in arcs)
        return cls(int(root_index), packed)


@dataclass(frozen=True)
class ResidueTuple:
    pole_indices: tuple
    values: tuple
    projective: bool

    def as_dict(self):
        return dict(zip(self.pole_indices, self.values))


def _min_pairwise_distance(spec):
    pos = spec.positions
    if len(pos) < 2:
        if spec.genus == 1:
            return min(abs(m + n * spec.tau)
                       for m in (-1, 0, 1) for n in (-1, 0, 1) if (m, n) != (0, 0))
        return 1.0
    dists = []
    for j in range(len(pos)):
        for k in range(j + 1, len(pos)):
            if spec.genus == 0:
                dists.append(abs(pos[j] - pos[k]))
            else:
                dists.append(torus_distance(pos[j], pos[k], spec.tau))
    if spec.genus == 1:
        dists.append(min(abs(m + n * spec.tau)
                         for m in (-1, 0, 1) for n in (-1, 0, 1) if (m, n) != (0, 0)))
    return min(dists)


def _clear_radius(spec, j):
    """Distance from cone point j to the nearest other cone point (or its
    own lattice translates at genus 1)."""
    pos = spec.positions
    dists = []
    for k in range(len(pos)):
        if k == j:
            continue
        if spec.genus == 0:
            dists.append(abs(pos[j] - pos[k]))
        else:
            dists.append(torus_distance(pos[j], pos[k], spec.tau))
    if spec.genus == 1:
        dists.append(min(abs(m + n * spec.tau)
                         for m in (-1, 0, 1) for n in (-1, 0, 1) if (m, n) != (0, 0)))
    return min(dists) if dists else 1.0


def _require_integral_pole(spec, j):
    if j not in integral_pole_indices(spec):
        raise NotIntegralPole(
            f"cone point {j} has order {spec.cone_points[j].order}, "
            "not a negative integer")


def _transport_log(gamma, segments, quadrature):
    return -integrate(gamma, segments, quadrature)


def _circle_residue(gamma, center, radius, entry_log, entry_angle, quadrature):
    """Residue of the flat branch about `center`, entering the circle at
    angle `entry_angle` with log value `entry_log`.

    Returns (residue, branch_defect, magnitude_scale); the defect is
    |f after a full turn - f at entry| / |f at entry| and must be ~0 for an
    integral pole."""
    quadrature = quadrature or Quadrature()
    prev = None
    for n_arcs in (256, 512, 1024, 2048):
        thetas = entry_angle + 2.0 * np.pi * np.arange(n_arcs + 1) / n_arcs
        # one Gauss-Legendre panel per sub-arc, all integrand calls batched
        arcs = [ArcSegment(center, radius, thetas[k], thetas[k + 1])
                for k in range(n_arcs)]
        vals = np.array([_panel(gamma, a, 0.0, 1.0)[0] for a in arcs])
        logs = entry_log - np.concatenate([[0.0], np.cumsum(vals)])
        f = np.exp(logs[:-1])
        residue = radius * np.sum(f * np.exp(1j * thetas[:-1])) / n_arcs
        defect = abs(np.exp(logs[-1]) - np.exp(logs[0])) / abs(np.exp(logs[0]))
        scale = radius * float(np.mean(np.abs(f)))
        if prev is not None and abs(residue - prev) <= max(1e-11, 1e-9 * abs(residue)):
            return residue, defect, scale
        prev = residue
    raise ToleranceNotReached(
        f"residue circle at {center} did not converge by 2048 sub-arcs")


def _normalization_index(points, start, dmin):
    for k, p in enumerate(points):
        if abs(p - start) >= _NORMALIZATION_FRACTION * dmin:
            return k
    raise InvalidSpec("arc has no sample far enough from its start to "
                      "anchor the flat germ")


def _truncate_at_pole(points, pole, radius, lo):
    last = None
    for k in range(lo, len(points)):
        if abs(points[k] - pole) >= radius:
            last = k
    if last is None:
        raise InvalidSpec("arc enters the residue circle immediately; "
                          "sample it further from the pole")
    return last


def _arc_entry(gamma, points, k0, pole, radius, base_log, quadrature):
    """Transport from points[k0] along the arc, stopping on the circle of
    given radius about the pole; returns (entry_log, entry_angle)."""
    k1 = _truncate_at_pole(points, pole, radius, k0)
    path = list(points[k0:k1 + 1])
    direction = path[-1] - pole
    entry = pole + radius * direction / abs(direction)
    path.append(entry)
    segs = [LineSegment(path[i], path[i + 1]) for i in range(len(path) - 1)
            if path[i] != path[i + 1]]
    log = base_log + (_transport_log(gamma, segs, quadrature) if segs else 0.0)
    return log, float(np.angle(entry - pole))


def flat_residue_at(spec, pole_index, arc_points, radius=None, quadrature=None):
    """Residue at an integral pole of the flat branch carried along the arc.

    The arc must end at the pole; the germ is normalized to 1 at the first
    arc sample far enough from the arc's start."""
    ensure_valid(spec)
    _require_integral_pole(spec, pole_index)
    pts = [complex(p) for p in arc_points]
    if len(pts) < 2:
        raise InvalidSpec("arc needs at least 2 samples")
    pole = spec.cone_points[pole_index].position
    if abs(pts[-1] - pole) > 1e-9:
        raise InvalidSpec(
            f"arc ends at {pts[-1]}, not at cone point {pole_index} ({pole})")
    if radius is None:
        radius = 0.25 * _clear_radius(spec, pole_index)
    dmin = _min_pairwise_distance(spec)
    gamma = connection_form(spec)
    k0 = _normalization_index(pts, pts[0], dmin)
    entry_log, entry_angle = _arc_entry(
        gamma, pts, k0, pole, radius, 0j, quadrature)
    residue, defect, _ = _circle_residue(
        gamma, pole, radius, entry_log, entry_angle, quadrature)
    if defect > 1e-9:
        raise NotIntegralPole(
            f"flat branch failed to close around cone point {pole_index} "
            f"(defect {defect:.2e}); its local holonomy is not 1")
    return residue


def _validate_tree(spec, tree):
    poles = integral_pole_indices(spec)
    if not poles:
        raise NotIntegralPole("spec has no integral poles")
    if tree.root_index not in poles:
        raise NotIntegralPole(f"tree root {tree.root_index} is not an integral pole")
    targets = [j for j, _ in tree.arcs]
    expected = [j for j in poles if j != tree.root_index]
    if sorted(targets) != sorted(expected):
        raise InvalidSpec(
            f"tree arcs reach {sorted(targets)}, expected exactly {sorted(expected)}")
    root_pos = spec.cone_points[tree.root_index].position
    for j, pts in tree.arcs:
        if len(pts) < 2:
            raise InvalidSpec(f"arc to {j} needs at least 2 samples")
        if abs(pts[0] - root_pos) > 1e-9:
            raise InvalidSpec(f"arc to {j} does not start at the root")
        if abs(pts[-1] - spec.cone_points[j].position) > 1e-9:
            raise InvalidSpec(f"arc to {j} does not end at cone point {j}")


def _root_disk_connector(root, z_from, z_to, hop_radius):
    """Segments from z_from to z_to staying inside the punctured root disk:
    radial in, circular hop, radial out.  Any route works here because the
    root's local holonomy is trivial."""
    u0 = (z_from - root) / abs(z_from - root)
    u1 = (z_to - root) / abs(z_to - root)
    a0 = root + hop_radius * u0
    a1 = root + hop_radius * u1
    th0, th1 = np.angle(u0), np.angle(u1)
    sweep = (th1 - th0 + np.pi) % (2.0 * np.pi) - np.pi
    segs = []
    if z_from != a0:
        segs.append(LineSegment(z_from, a0))
    if sweep != 0:
        segs.append(ArcSegment(root, hop_radius, float(th0), float(th0 + sweep)))
    if a1 != z_to:
        segs.append(LineSegment(a1, z_to))
    return segs


def res_gamma(spec, tree, quadrature=None, projective=True):
    """Residue tuple over all integral poles relative to the arc tree.

    Order: root first, then the arcs in listing order.  With projective=True
    the tuple is scaled so its first nonzero coordinate is 1; the raw
    transported values (germ fixed to 1 at the normalization point) come
    back otherwise."""
    ensure_valid(spec)
    _validate_tree(spec, tree)
    gamma = connection_form(spec)
    dmin = _min_pairwise_distance(spec)
    root = tree.root_index
    root_pos = spec.cone_points[root].position
    hop = 0.2 * dmin

    if tree.arcs:
        first_arc = tree.arcs[0][1]
        z_star = first_arc[_normalization_index(first_arc, root_pos, dmin)]
    else:
        z_star = root_pos + 3.0 * hop

    indices, values, scales = [root], [], []

    # the root's own residue: radial entry from the normalization point,
    # with the circle kept strictly inside that point
    r_root = min(0.25 * _clear_radius(spec, root), 0.6 * abs(z_star - root_pos))
    entry_log, entry_angle = _arc_entry(
        gamma, [z_star, root_pos], 0, root_pos, r_root, 0j, quadrature)
    res, defect, scale = _circle_residue(
        gamma, root_pos, r_root, entry_log, entry_angle, quadrature)
    if defect > 1e-9:
        raise NotIntegralPole(
            f"flat branch failed to close around the root (defect {defect:.2e})")
    values.append(res)
    scales.append(scale)

    for j, pts in tree.arcs:
        k0 = _normalization_index(pts, root_pos, dmin)
        connector = _root_disk_connector(root_pos, z_star, pts[k0], hop)
        base_log = _transport_log(gamma, connector, quadrature) if connector else 0j
        pole = spec.cone_points[j].position
        r_j = 0.25 * _clear_radius(spec, j)
        entry_log, entry_angle = _arc_entry(
            gamma, pts, k0, pole, r_j, base_log, quadrature)
        res, defect, scale = _circle_residue(
            gamma, pole, r_j, entry_log, entry_angle, quadrature)
        if defect > 1e-9:
            raise NotIntegralPole(
                f"flat branch failed to close around cone point {j} "
                f"(defect {defect:.2e})")
        indices.append(j)
        values.append(res)
        scales.append(scale)

    values = np.array(values, dtype=complex)
    if np.all(np.abs(values) <= 1e-10 * np.array(scales)):
        raise AllResiduesZero(
            "every integral pole has zero residue; the projectivized tuple "
            "is undefined")
    if not projective:
        return ResidueTuple(tuple(indices), tuple(values), False)
    nz = np.nonzero(np.abs(values) > 1e-12 * np.max(np.abs(values)))[0][0]
    scaled = values / values[nz]
    scaled[nz] = 1.0  # complex self-division is not exactly 1
    return ResidueTuple(tuple(indices), tuple(scaled), True)


def _detour_path(spec, z_from, z_to, avoid, clearance, depth=0):
    """Waypoints from z_from to z_to keeping `clearance` away from the cone
    points listed in `avoid`; bends deterministically around offenders."""
    d = z_to - z_from
    worst, best_dist = None, None
    for c in avoid:
        t = min(1.0, max(0.0, ((c - z_from) * np.conj(d)).real / abs(d) ** 2))
        gap = abs(c - (z_from + t * d))
        if gap < clearance and (best_dist is None or gap < best_dist):
            worst, best_dist = c, gap
    if worst is None:
        return [z_from, z_to]
    if depth >= 8:
        raise InvalidSpec("could not route a transport path around the cone points")
    perp = 1j * d / abs(d)
    side = perp if ((worst - z_from) * np.conj(perp)).real <= 0 else -perp
    waypoint = worst + 2.0 * clearance * side
    left = _detour_path(spec, z_from, waypoint, avoid, clearance, depth + 1)
    right = _detour_path(spec, waypoint, z_to, avoid, clearance, depth + 1)
    return left + right[1:]


def residue_sum_check(spec, quadrature=None):
    """Sum of the global flat form's residues over all poles; 0 for any
    translation surface by the residue theorem."""
    ensure_valid(spec)
    if is_translation_surface(spec, quadrature) == "not_translation":
        raise NotTranslationSurface(
            "residue_sum_check needs trivial holonomy; use res_gamma for "
            "the tree-relative tuple")
    poles = integral_pole_indices(spec)
    if not poles:
        return 0j
    gamma = connection_form(spec)
    positions = spec.positions
    if spec.genus == 1:
        z0 = _lattice_basepoint(spec)
    else:
        centroid = positions.mean()
        z0 = centroid + 2.0 + 2.0 * max(abs(positions - centroid))
    total = 0j
    for j in poles:
        pole = spec.cone_points[j].position
        r_j = 0.25 * _clear_radius(spec, j)
        approach = pole + 2.0 * r_j * (z0 - pole) / abs(z0 - pole)
        avoid = [p for k, p in enumerate(positions) if k != j]
        waypoints = _detour_path(spec, z0, approach, avoid, 1.2 * r_j)
        segs = [LineSegment(waypoints[i], waypoints[i + 1])
                for i in range(len(waypoints) - 1)]
        base_log = _transport_log(gamma, segs, quadrature)
        entry_log, entry_angle = _arc_entry(
            gamma, [approach], 0, pole, r_j, base_log, quadrature)
        res, defect, _ = _circle_residue(
            gamma, pole, r_j, entry_log, entry_angle, quadrature)
        if defect > 1e-9:
            raise NotIntegralPole(
                f"flat branch failed to close around cone point {j}")
        total += res
    return total


# --- JSON format -------------------------------------------------------------

def tree_from_json(obj):
    check_fields(obj, "tree", required=("root_index", "arcs"))
    if not isinstance(obj["root_index"], int) or isinstance(obj["root_index"], bool):
        raise ValueError("tree.root_index: expected an integer")
    if not isinstance(obj["arcs"], list):
        raise ValueError("tree.arcs: expected a list")
    arcs = []
    for k, arc in enumerate(obj["arcs"]):
        check_fields(arc, f"tree.arcs[{k}]", required=("to_index", "points"))
        if not isinstance(arc["to_index"], int) or isinstance(arc["to_index"], bool):
            raise ValueError(f"tree.arcs[{k}].to_index: expected an integer")
        if not isinstance(arc["points"], list):
            raise ValueError(f"tree.arcs[{k}].points: expected a list")
        pts = [as_complex(p, f"tree.arcs[{k}].points[{i}]")
               for i, p in enumerate(arc["points"])]
        arcs.append((arc["to_index"], pts))
    return ArcTree.build(obj["root_index"], arcs)


def tree_to_json(tree):
    return {
        "root_index": tree.root_index,
        "arcs": [{"to_index": j, "points": [pair(p) for p in pts]}
                 for j, pts in tree.arcs],
    }
