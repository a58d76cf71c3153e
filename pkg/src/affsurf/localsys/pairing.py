"""The Hermitian cup-product form on compactly supported first cohomology.

For a unitary character the conjugate system is the inverse one, so
alpha cup conj(beta) lands in the trivial system and can be summed against
the relative fundamental class Sum_T eps_T T, where eps_T = +1 when the
triangle's listed orientation agrees with sorted vertex order.  Multiplying
the evaluation by i makes graded commutativity into Hermitian symmetry.
The form is the leafwise metric of the isoresidual foliation in its
simplicial incarnation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegeneratePairing, NonUnitaryCharacter
from .twisted import compact_support_cohomology

_DEGENERACY_TOL = 1e-8


@dataclass(frozen=True)
class PairingReport:
    matrix: object       # Hermitian, on the h1_c basis
    signature: tuple     # (positive, negative) eigenvalue counts
    margin: float        # smallest singular value
    basis: object        # the edge-cochain basis the matrix refers to


def _orientation_sign(tri):
    i, j, k = tri
    return 1 if (i < j < k or j < k < i or k < i < j) else -1


def _cup_with_gross(complex_, index, t, alpha, beta):
    total = 0j
    gross = 0.0
    for tri in complex_.triangles:
        i, j, k = sorted(tri)
        eps = _orientation_sign(tri)
        front = alpha[index[(i, j)]] / np.conj(t[index[(i, j)]])
        back = np.conj(beta[index[(j, k)]])
        total += eps * front * back
        gross += abs(front) * abs(back)
    return 1j * total, gross


def cup_evaluate(complex_, chi, alpha, beta):
    """i times (alpha cup conj(beta)) summed against the fundamental class.

    alpha and beta are edge cochains, indexed like complex_.edges.  No
    cocycle condition is assumed, so this can probe Stokes-type identities
    as well as pair honest classes.
    """
    alpha = np.asarray(alpha, dtype=complex)
    beta = np.asarray(beta, dtype=complex)
    n_edges = len(complex_.edges)
    assert alpha.shape == (n_edges,) and beta.shape == (n_edges,)
    index = complex_.edge_index()
    t = np.asarray(chi.edge_values)
    value, _ = _cup_with_gross(complex_, index, t, alpha, beta)
    return complex(value)


def veech_pairing(complex_, chi):
    """Hermitian matrix of i * <alpha cup conj(beta), [K, boundary]> on a
    basis of compactly supported H^1."""
    if not chi.is_unitary():
        raise NonUnitaryCharacter(
            "the cup-product form needs |chi| = 1 on every edge")
    report = compact_support_cohomology(complex_, chi)
    basis = report.basis1
    k = basis.shape[1]
    index = complex_.edge_index()
    t = np.asarray(chi.edge_values)
    matrix = np.zeros((k, k), dtype=complex)
    gross = 0.0
    for a in range(k):
        for b in range(k):
            value, size = _cup_with_gross(
                complex_, index, t, basis[:, a], basis[:, b])
            matrix[a, b] = value
            gross = max(gross, size)
    if k == 0:
        return PairingReport(matrix, (0, 0), float("inf"), basis)
    s = np.linalg.svd(matrix, compute_uv=False)
    # gross is the cancellation-free size of the sum; a matrix tiny against
    # it is one whose classes pair to zero, not a small nondegenerate form
    if s[-1] < _DEGENERACY_TOL * max(s[0], gross):
        raise DegeneratePairing(
            f"cup-product form is numerically singular "
            f"(sigma_min = {s[-1]:.2e} against scale {max(s[0], gross):.2e})")
    eigenvalues = np.linalg.eigvalsh((matrix + matrix.conj().T) / 2.0)
    p = int(np.sum(eigenvalues > 0))
    q = int(np.sum(eigenvalues < 0))
    return PairingReport(matrix, (p, q), float(s[-1]), basis)
