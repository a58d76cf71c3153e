"""Cohomology of a flat line bundle over a SurfaceComplex.

Cochains sit on sorted simplices with the value kept in the fiber of the
first (lowest) vertex; pulling the later vertices' data forward uses the
inverse transport h(u,v) = t(u->v)^{-1}.  With that convention

    (d0 f)(u,v)   = h(u,v) f(v) - f(u)
    (d1 c)(i,j,k) = h(i,j) c(j,k) - c(i,k) + c(i,j)

and d1 d0 = 0 is literally the flatness relation.  Compact support is the
relative complex of (K, boundary): cochains vanishing on boundary vertices
and edges.  Dimensions come from numerical ranks; representative bases are
the harmonic cochains (kernel of the differential and of the adjoint of the
previous one) under the standard inner product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_RANK_TOL = 1e-9


@dataclass(frozen=True)
class CohomologyReport:
    dims: tuple          # (h0, h1, h2)
    basis0: object       # arrays, one column per class; compact-support
    basis1: object       # bases are embedded with zeros on the boundary
    basis2: object
    compact: bool


def _check_pair(complex_, chi):
    assert chi.complex == complex_, "character was built on a different complex"


def coboundaries(complex_, chi):
    """The twisted d0 (edges x vertices) and d1 (triangles x edges)."""
    _check_pair(complex_, chi)
    edges = complex_.edges
    index = complex_.edge_index()
    t = np.asarray(chi.edge_values)
    d0 = np.zeros((len(edges), complex_.n_vertices), dtype=complex)
    for e, (u, v) in enumerate(edges):
        d0[e, v] += 1.0 / t[e]
        d0[e, u] -= 1.0
    d1 = np.zeros((len(complex_.triangles), len(edges)), dtype=complex)
    for row, tri in enumerate(complex_.triangles):
        i, j, k = sorted(tri)
        d1[row, index[(j, k)]] += 1.0 / t[index[(i, j)]]
        d1[row, index[(i, k)]] -= 1.0
        d1[row, index[(i, j)]] += 1.0
    return d0, d1


def _rank(m):
    if min(m.shape) == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > _RANK_TOL * s[0]))


def _nullspace(m, dim):
    if m.shape[1] == 0:
        return np.zeros((0, 0), dtype=complex)
    if m.shape[0] == 0:
        return np.eye(m.shape[1], dtype=complex)
    _, s, vh = np.linalg.svd(m)
    rank = int(np.sum(s > _RANK_TOL * s[0])) if s.size and s[0] > 0 else 0
    basis = vh[rank:].conj().T
    assert basis.shape[1] == dim
    return basis


def _boundary_simplices(complex_):
    edge_flags = np.zeros(len(complex_.edges), dtype=bool)
    vertex_flags = np.zeros(complex_.n_vertices, dtype=bool)
    for cycle in complex_.boundary_cycles:
        for e in cycle:
            edge_flags[e] = True
            u, v = complex_.edges[e]
            vertex_flags[u] = vertex_flags[v] = True
    return vertex_flags, edge_flags


def twisted_cohomology(complex_, chi):
    """Cohomology of the local system: dims (h0, h1, h2) plus harmonic
    representative bases."""
    d0, d1 = coboundaries(complex_, chi)
    n_v, n_e, n_t = complex_.counts()
    r0, r1 = _rank(d0), _rank(d1)
    dims = (n_v - r0, n_e - r0 - r1, n_t - r1)
    basis0 = _nullspace(d0, dims[0])
    basis1 = _nullspace(np.vstack([d1, d0.conj().T]), dims[1])
    basis2 = _nullspace(d1.conj().T, dims[2])
    return CohomologyReport(dims, basis0, basis1, basis2, compact=False)


def compact_support_cohomology(complex_, chi):
    """Relative-to-boundary cohomology, which is the compactly supported
    cohomology of the punctured surface; cross-checked against duality
    h^i_c(chi) = h^{2-i}(chi^{-1}) before returning."""
    d0, d1 = coboundaries(complex_, chi)
    v_bad, e_bad = _boundary_simplices(complex_)
    vi = np.nonzero(~v_bad)[0]
    ei = np.nonzero(~e_bad)[0]
    d0r = d0[np.ix_(ei, vi)]
    d1r = d1[:, ei]
    r0, r1 = _rank(d0r), _rank(d1r)
    dims = (len(vi) - r0, len(ei) - r0 - r1, len(complex_.triangles) - r1)

    dual = twisted_cohomology(complex_, chi.inverse()).dims
    assert dims == dual[::-1], (
        f"Poincare duality failed: relative dims {dims}, "
        f"dual dims {dual[::-1]}")

    b0 = np.zeros((complex_.n_vertices, dims[0]), dtype=complex)
    b0[vi] = _nullspace(d0r, dims[0])
    b1 = np.zeros((len(complex_.edges), dims[1]), dtype=complex)
    b1[ei] = _nullspace(np.vstack([d1r, d0r.conj().T]), dims[1])
    b2 = _nullspace(d1r.conj().T, dims[2])
    return CohomologyReport(dims, b0, b1, b2, compact=True)
