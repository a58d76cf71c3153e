"""Weierstrass sigma and zeta on the lattice Z + tau*Z via Jacobi theta series.

Conventions
-----------
Lattice:  Lambda(tau) = Z + tau*Z with Im(tau) > 0.  All functions reduce tau
to the SL(2, Z) fundamental domain first (|Re| <= 1/2, |tau| >= 1); writing
tau* = (a*tau + b)/(c*tau + d) and s = c*tau + d, the lattices are related by
Lambda(tau) = s * Lambda(tau*), and

    sigma(z; Lambda) = s * sigma(z/s; Lambda*),
    zeta(z; Lambda)  = (1/s) * zeta(z/s; Lambda*).

On the reduced lattice the nome q = exp(i*pi*tau*) satisfies |q| <= 0.0659,
so a dozen terms of

    theta1(v) = 2 * sum_{n>=0} (-1)^n q^{(n+1/2)^2} sin((2n+1) v)

carry the series far below double precision.  Base-cell values:

    sigma(w) = exp(eta1 w^2 / 2) * theta1(pi w) / (pi * theta1'(0)),
    zeta(w)  = eta1 w + pi * theta1'(pi w) / theta1(pi w),
    eta1     = -pi^2 theta1'''(0) / (3 theta1'(0)),        eta2 = eta1 tau - 2 pi i,

and arguments are brought into the base cell with the quasi-periodicity laws

    sigma(w + m + n tau) = (-1)^{m+n+mn} exp((m eta1 + n eta2)(w + (m + n tau)/2)) sigma(w),
    zeta(w + m + n tau)  = zeta(w) + m eta1 + n eta2.

The Legendre relation eta1*tau - eta2 = 2*pi*i is enforced at 1e-10 whenever
lattice data is built; a violation means the reduction went wrong and raises
DegenerateLattice rather than returning quietly poisoned values.

zeta has poles on the lattice and sigma has zeros there; evaluating exactly
on a lattice point is non-finite (sigma: 0) by design, so integration layers can
surface NonFiniteEvaluation with the offending point attached.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import DegenerateLattice

_N_THETA_TERMS = 12


@dataclass(frozen=True)
class LatticeData:
    tau: complex
    tau_reduced: complex
    scale: complex              # s with Lambda(tau) = s * Lambda(tau_reduced)
    unimodular: tuple           # (a, b, c, d), tau_reduced = (a tau + b)/(c tau + d)
    q: complex                  # nome exp(i pi tau_reduced)
    eta1_red: complex
    eta2_red: complex
    eta1: complex               # quasi-periods of Lambda(tau) for periods 1, tau
    eta2: complex


def _reduce_tau(tau):
    """Bring tau into the fundamental domain, tracking the SL(2,Z) word."""
    a, b, c, d = 1, 0, 0, 1
    t = complex(tau)
    for _ in range(200):
        n = int(np.floor(t.real + 0.5))
        if n != 0:
            t -= n
            a, b = a - n * c, b - n * d
        if abs(t) < 1.0 - 1e-14:
            t = -1.0 / t
            a, b, c, d = -c, -d, a, b
        else:
            return t, (a, b, c, d)
    raise DegenerateLattice(f"tau reduction did not terminate for tau = {tau}")


def _theta_consts(q):
    n = np.arange(_N_THETA_TERMS)
    signs = (-1.0) ** n
    powers = q ** ((n + 0.5) ** 2)
    d1 = 2.0 * np.sum(signs * (2 * n + 1) * powers)
    d3 = -2.0 * np.sum(signs * (2 * n + 1) ** 3 * powers)
    return d1, d3


def _theta1(v, q):
    """theta1 and theta1' at complex v (vectorized)."""
    v = np.asarray(v, dtype=complex)
    n = np.arange(_N_THETA_TERMS)
    signs = (-1.0) ** n
    powers = q ** ((n + 0.5) ** 2)
    coeff = signs * powers
    arg = np.multiply.outer(v, 2 * n + 1)
    th = 2.0 * np.sum(coeff * np.sin(arg), axis=-1)
    dth = 2.0 * np.sum(coeff * (2 * n + 1) * np.cos(arg), axis=-1)
    return th, dth


@lru_cache(maxsize=512)
def lattice_data(tau):
    tau = complex(tau)
    if not np.isfinite(tau) or tau.imag <= 0:
        raise DegenerateLattice(f"Im(tau) must be positive, got tau = {tau}")
    t_red, (a, b, c, d) = _reduce_tau(tau)
    s = c * tau + d
    q = np.exp(1j * np.pi * t_red)
    d1, d3 = _theta_consts(q)
    eta1_red = -(np.pi ** 2) * d3 / (3.0 * d1)
    eta2_red = eta1_red * t_red - 2j * np.pi
    # Periods of Lambda(tau): 1 = s*(a - c*tau_red), tau = s*(d*tau_red - b).
    eta1 = (a * eta1_red - c * eta2_red) / s
    eta2 = (d * eta2_red - b * eta1_red) / s
    if abs(eta1 * tau - eta2 - 2j * np.pi) > 1e-10:
        raise DegenerateLattice(
            f"Legendre relation failed for tau = {tau}; reduction is suspect")
    return LatticeData(tau, t_red, s, (a, b, c, d), q, eta1_red, eta2_red, eta1, eta2)


def _split_lattice_coords(w, tau_red):
    """Integer part (m, n) and remainder of w along Z + tau_red*Z."""
    y = w.imag / tau_red.imag
    x = w.real - y * tau_red.real
    m = np.floor(x + 0.5).astype(int)
    n = np.floor(y + 0.5).astype(int)
    return m, n, w - m - n * tau_red


def weierstrass_sigma(z, tau):
    """sigma(z) for the lattice Z + tau*Z, vectorized over z."""
    lat = lattice_data(tau)
    z_arr = np.asarray(z, dtype=complex)
    w_full = z_arr / lat.scale
    m, n, w = _split_lattice_coords(w_full, lat.tau_reduced)
    th, _ = _theta1(np.pi * w, lat.q)
    d1, _ = _theta_consts(lat.q)
    base = np.exp(0.5 * lat.eta1_red * w ** 2) * th / (np.pi * d1)
    eps = np.where((m + n + m * n) % 2 == 0, 1.0, -1.0)
    shift = m + n * lat.tau_reduced
    fac = eps * np.exp((m * lat.eta1_red + n * lat.eta2_red) * (w + 0.5 * shift))
    out = lat.scale * fac * base
    return out if out.shape else complex(out)


def weierstrass_zeta(z, tau):
    """zeta(z) for the lattice Z + tau*Z, vectorized over z.

    Poles on the lattice evaluate to a non-finite value; callers that integrate near cone
    points are expected to keep their contours away from them.
    """
    lat = lattice_data(tau)
    z_arr = np.asarray(z, dtype=complex)
    w_full = z_arr / lat.scale
    m, n, w = _split_lattice_coords(w_full, lat.tau_reduced)
    th, dth = _theta1(np.pi * w, lat.q)
    with np.errstate(divide="ignore", invalid="ignore"):
        base = lat.eta1_red * w + np.pi * dth / th
        out = (base + m * lat.eta1_red + n * lat.eta2_red) / lat.scale
    return out if out.shape else complex(out)


def quasi_periods(tau):
    """(eta1, eta2) with zeta(z + 1) = zeta(z) + eta1, zeta(z + tau) = zeta(z) + eta2."""
    lat = lattice_data(tau)
    return lat.eta1, lat.eta2
