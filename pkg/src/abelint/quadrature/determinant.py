"""The determinant of the two determinations of the vanishing cycle."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from ..bifurcation import PeriodAnnulus
from ..hamiltonian import HamiltonianModel
from .paths import determination_walk


@dataclass
class DeltaSample:
    h: float
    delta: complex
    im_F: float
    J_plus: tuple  # (J0, J1) on delta^+
    J_minus: tuple

    def to_record(self) -> dict:
        return {
            "h": self.h,
            "delta_re": self.delta.real,
            "delta_im": self.delta.imag,
            "im_F": self.im_F,
            "I0_plus_re": self.J_plus[0].real,
            "I0_plus_im": self.J_plus[0].imag,
            "I1_plus_re": self.J_plus[1].real,
            "I1_plus_im": self.J_plus[1].imag,
        }


def _critical_above(m: HamiltonianModel, a: PeriodAnnulus, rel: float = 1e-12):
    """Real critical points with critical value above ``h_s``."""
    out = []
    for x in m.real_critical_points:
        v = float(m.P(x))
        if v > a.h_s + rel * max(1.0, abs(a.h_s)):
            out.append((float(x), v))
    return out


def delta_curve(m: HamiltonianModel, a: PeriodAnnulus, hs, require_exceptional: bool = True, tol=1e-10) -> list:
    """``Delta(h)`` and ``Im F(h)`` on a grid of real ``h > h_s``."""
    if require_exceptional and not a.exceptional:
        raise ValueError("Delta(h) is only meaningful for an exceptional annulus")
    hs = np.atleast_1d(np.asarray(hs, dtype=float))
    plus = determination_walk(m, a, hs, +1, tol=tol)
    minus = determination_walk(m, a, hs, -1, tol=tol)
    out = []
    for h, p, q in zip(hs, plus, minus):
        j0p, j1p = p.values[0], p.values[1]
        j0m, j1m = q.values[0], q.values[1]
        delta = j1p * j0m - j0p * j1m
        im_f = (delta / (2j * j0p * j0m)).real
        out.append(DeltaSample(float(h), complex(delta), float(im_f), (j0p, j1p), (j0m, j1m)))
    return out


def delta_determinant(m: HamiltonianModel, h: float, a: PeriodAnnulus, **kw):
    """``(Delta(h), Im F(h))``; a critical ``h`` is routed to :func:`delta_at_critical`."""
    for _, v in _critical_above(m, a):
        if abs(h - v) <= 1e-13 * max(1.0, abs(v)):
            dc = delta_at_critical(m, a)
            return dc.contour, float("nan")
    s = delta_curve(m, a, [h], **kw)[0]
    return s.delta, s.im_F


# -- degenerate level ----------------------------------------------------


def _tracked_sqrt(vals, start):
    v = np.sqrt(np.asarray(vals, dtype=complex))
    if (v[0] * np.conj(start)).real < 0:
        v[0] = -v[0]
    flips = (v[1:] * np.conj(v[:-1])).real < 0
    return v * np.concatenate([[1.0], np.cumprod(np.where(flips, -1.0, 1.0))])


def _cubic_w(x, roots):
    return np.prod([x - r for r in roots], axis=0)


def elliptic_period(roots, i: int, j: int, n: int = 400) -> complex:
    """``2 * int_{x_i}^{x_j} dx / w`` on ``w**2 = (x-x1)(x-x2)(x-x3)``."""
    u, v = roots[i], roots[j]
    (k,) = [t for t in range(3) if t not in (i, j)]
    c, d = 0.5 * (u + v), 0.5 * (v - u)
    theta = (np.arange(n) + 0.5) * np.pi / n
    x = c - d * np.cos(theta)  # runs from u to v
    s = _tracked_sqrt(x - roots[k], cmath.sqrt(x[0] - roots[k]))
    # sqrt((x-u)(x-v)) = i d sin(theta) along the segment
    return 2 * np.sum(d * np.sin(theta) / (1j * d * np.sin(theta) * s)) * (np.pi / n)


def _abel_to_node(x0, xj, roots, w0, n: int = 200) -> complex:
    """``2 * int_{x_j}^{x0} dx / w`` with ``w`` continued to ``w(x0) = w0``."""
    s, wts = np.polynomial.legendre.leggauss(n)
    s = 0.5 * (s + 1.0)
    wts = 0.5 * wts
    order = np.argsort(-s)  # from x0 towards x_j
    s, wts = s[order], wts[order]
    x = xj + (x0 - xj) * s * s
    others = [r for r in roots if r != xj]
    # w = sqrt(x - x_j) * sqrt((x-a)(x-b)); sqrt(x - x_j) = sqrt(x0 - x_j) * s
    g = (x - others[0]) * (x - others[1])
    g0 = (x0 - others[0]) * (x0 - others[1])
    sq0 = w0 / cmath.sqrt(x0 - xj)
    rest = _tracked_sqrt(np.r_[g0, g], sq0)[1:]
    integrand = 2 * (x0 - xj) * s / (cmath.sqrt(x0 - xj) * s * rest)
    return 2 * np.sum(wts * integrand)


@dataclass
class CriticalDelta:
    h0: float
    x0: float
    cubic_roots: tuple
    contour: complex
    residue: complex
    sign: int
    lattice_shift: tuple
    rel_diff: float
    limit_check: float

    def to_dict(self) -> dict:
        return {
            "h0": self.h0,
            "x0": self.x0,
            "delta_contour_re": self.contour.real,
            "delta_contour_im": self.contour.imag,
            "delta_residue_re": self.residue.real,
            "delta_residue_im": self.residue.imag,
            "sign": self.sign,
            "lattice_shift": list(self.lattice_shift),
            "rel_diff": self.rel_diff,
            "limit_rel_diff": self.limit_check,
        }


def delta_at_critical(m: HamiltonianModel, a: PeriodAnnulus, lattice: int = 2) -> CriticalDelta:
    """``Delta`` at a critical level above ``h_s`` by two independent routes.

    The contour route evaluates the determinations directly at ``h0``.  The
    residue route uses the reciprocity law on the elliptic curve obtained by
    removing the double root: ``Delta = +-2 pi i / (kappa**2 w0) * int_{P-}^{P+} dx/w``
    with ``kappa**2 = -lead/y_factor``.  The Abel integral is defined only up
    to the period lattice, so the residue value is matched over small
    lattice translates and both signs.
    """
    crit = _critical_above(m, a)
    if not crit:
        raise ValueError("no critical value above h_s for this annulus")
    x0, h0 = min(crit, key=lambda t: t[1])
    coeffs = np.array(m.p_coeffs, dtype=float).copy()
    coeffs[0] -= h0
    cubic, rem = np.polynomial.polynomial.polydiv(coeffs, [x0 * x0, -2 * x0, 1.0])
    lead = cubic[-1]
    roots = np.polynomial.polynomial.polyroots(cubic / lead)
    roots = roots[np.lexsort((roots.imag, roots.real))]
    gaps = [abs(roots[i] - roots[j]) for i in range(3) for j in range(i + 1, 3)]
    gaps += [abs(r - x0) for r in roots]
    if min(gaps) < 1e-8:
        raise ValueError("roots of the degenerate level are not distinct")

    contour = delta_curve(m, a, [h0], require_exceptional=False)[0].delta
    eta = 1e-6 * max(abs(h0 - a.h_s), 1e-300)
    near = delta_curve(m, a, [h0 - eta, h0 + eta], require_exceptional=False)
    limit = 0.5 * (near[0].delta + near[1].delta)
    limit_check = abs(limit - contour) / abs(contour)

    kappa2 = -m.leading / m.y_factor
    w0 = cmath.sqrt(_cubic_w(x0, roots))
    # branch point whose segment to x0 stays farthest from the other two
    def clearance(j):
        others = [roots[t] for t in range(3) if t != j]
        seg = np.linspace(roots[j], x0, 200)
        return min(np.min(np.abs(seg - o)) for o in others)

    j = max(range(3), key=clearance)
    U = _abel_to_node(x0, roots[j], list(roots), w0)
    omega_a = elliptic_period(roots, 0, 1)
    omega_b = elliptic_period(roots, 1, 2)
    pref = 2j * math.pi / (kappa2 * w0)
    best = None
    for sgn in (1, -1):
        for p in range(-lattice, lattice + 1):
            for q in range(-lattice, lattice + 1):
                cand = sgn * pref * (U + p * omega_a + q * omega_b)
                d = abs(cand - contour)
                if best is None or d < best[0]:
                    best = (d, cand, sgn, (p, q))
    d, residue, sgn, shift = best
    return CriticalDelta(
        h0=h0,
        x0=x0,
        cubic_roots=tuple(complex(r) for r in roots),
        contour=complex(contour),
        residue=complex(residue),
        sign=sgn,
        lattice_shift=shift,
        rel_diff=float(d / abs(residue)),
        limit_check=float(limit_check),
    )
