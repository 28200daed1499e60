"""Cycle integrals over closed contours on the curve ``y_factor*y**2 = h - P(x)``.

A vanishing cycle is represented by the ordered pair of branch points it
encircles.  The canonical value for a pair ``(z1, z2)`` is

    J = 2 * int_{z1}^{z2} x**k dx / f,

along the straight segment, where ``f`` is the branch of ``sqrt((h - P)/y_factor)``
continuous on the open segment with ``f(mid)`` equal to the principal root.
For a real oval ``(alpha, beta)`` this is ``I_k(h)``.  Numerically ``J`` is
computed as minus the counter-clockwise loop integral over a confocal
ellipse around the segment, which is smooth and periodic, so the trapezoid
rule converges geometrically.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..hamiltonian import HamiltonianModel, solve_level
from .real import DEFAULT_TOL, IntegralSample, Method, QuadratureError

MAX_ARG_STEP = math.pi / 64


class ContourError(QuadratureError):
    """No admissible contour separates the pair from the other branch points."""


def joukowski_rho(z1: complex, z2: complex, points) -> np.ndarray:
    """Size of the confocal ellipse through each point (1 on the segment itself)."""
    c, d = 0.5 * (z1 + z2), 0.5 * (z2 - z1)
    s = (np.asarray(points, dtype=complex) - c) / d
    root = np.sqrt(s - 1) * np.sqrt(s + 1)
    return np.maximum(np.abs(s + root), np.abs(s - root))


def _others(roots, pair):
    roots = np.asarray(roots, dtype=complex)
    keep = np.ones(len(roots), dtype=bool)
    for z in pair:
        keep[np.argmin(np.where(keep, np.abs(roots - z), np.inf))] = False
    return roots[keep]


def track_sqrt(values: np.ndarray, start: complex | None = None) -> np.ndarray:
    """Square roots of ``values`` continued along the sequence.

    Returns the tracked roots and the largest argument step between
    consecutive samples.
    """
    v = np.sqrt(np.asarray(values, dtype=complex))
    if start is not None and (v[0] * np.conj(start)).real < 0:
        v[0] = -v[0]
    flips = (v[1:] * np.conj(v[:-1])).real < 0
    sign = np.concatenate([[1.0], np.cumprod(np.where(flips, -1.0, 1.0))])
    t = v * sign
    steps = np.abs(np.angle(t[1:] / t[:-1])) if len(t) > 1 else np.zeros(0)
    return t, float(steps.max()) if len(steps) else 0.0


@dataclass
class ContourResult:
    values: dict
    errors: dict
    nodes: int
    ellipse: float
    rho_min: float
    max_arg_step: float = 0.0
    converged: bool = True

    def sample(self, h, k) -> IntegralSample:
        return IntegralSample(h, k, self.values[k], self.errors[k], Method.COMPLEX_CONTOUR, self.converged, self.nodes)


def _ellipse_radius(z1, z2, others, gap: float = 1e-12):
    if len(others) == 0:
        return 3.0, math.inf
    rho = joukowski_rho(z1, z2, others)
    rmin = float(rho.min())
    if rmin <= 1 + gap:
        raise ContourError(f"another branch point lies on the cycle segment (rho={rmin:.3e})")
    return min(math.sqrt(rmin), 3.0), rmin


def cycle_integrals(
    m: HamiltonianModel,
    h: complex,
    pair,
    ks=(0, 1),
    roots=None,
    tol: float = DEFAULT_TOL,
    max_nodes: int = 2**16,
) -> ContourResult:
    """Canonical ``J_k`` for the cycle around ``pair`` at level ``h``."""
    z1, z2 = complex(pair[0]), complex(pair[1])
    if z1 == z2:
        raise ContourError("pair endpoints coincide")
    if roots is None:
        roots = solve_level(m, h)
    others = _others(roots, (z1, z2))
    r, rmin = _ellipse_radius(z1, z2, others)
    c, d = 0.5 * (z1 + z2), 0.5 * (z2 - z1)
    yf = m.y_factor
    coeffs = np.array(m.p_coeffs, dtype=complex)
    coeffs[0] -= h

    def g(x):  # (h - P)/y_factor
        return -np.polynomial.polynomial.polyval(x, coeffs) / yf

    # reference value at theta = pi/2, reached radially from the midpoint
    f_mid = cmath.sqrt(g(c))
    rad = np.linspace(1.0, r, 257)
    path = c + 0.5j * d * (rad - 1.0 / rad)
    ref, _ = track_sqrt(g(path), start=f_mid)
    f_ref = ref[-1]

    ks = list(ks)
    prev = None
    n = 64
    while True:
        theta = 2 * np.pi * np.arange(n) / n
        w = r * np.exp(1j * theta)
        x = c + 0.5 * d * (w + 1.0 / w)
        dx = 0.5j * d * (w - 1.0 / w)
        y, step = track_sqrt(g(x))
        closing = np.angle(y[0] / y[-1])
        step = max(step, abs(closing))
        if step > MAX_ARG_STEP and 2 * n <= max_nodes:
            n *= 2
            continue
        q = n // 4
        if (y[q] * np.conj(f_ref)).real < 0:
            y = -y
        base = dx / y * (2 * np.pi / n)
        vals = np.array([-np.sum(x**k * base) for k in ks])
        scale = np.array([np.sum(np.abs(x) ** k * np.abs(base)) for k in ks])
        if prev is not None:
            err = np.abs(vals - prev)
            ok = bool(np.all(err <= tol * np.maximum(np.abs(vals), scale)))
            if ok or 2 * n > max_nodes:
                return ContourResult(
                    dict(zip(ks, vals)), dict(zip(ks, err)), n, r, rmin, step, ok and step <= MAX_ARG_STEP
                )
        prev = vals
        n *= 2


def complex_cycle_integral(m: HamiltonianModel, h: complex, pair, k: int = 0, **kw) -> complex:
    return complex(cycle_integrals(m, h, pair, (k,), **kw).values[k])


# -- root tracking -------------------------------------------------------


class TrackingError(QuadratureError):
    pass


def _match(old: np.ndarray, new: np.ndarray):
    dist = np.abs(old[:, None] - new[None, :])
    _, col = linear_sum_assignment(dist)
    return new[col], dist


def _segment_crossed(p1, p2, others_old, others_new) -> bool:
    """True when a branch point passes through the cycle segment between steps."""
    c_old, d_old = 0.5 * (p1[0] + p1[1]), 0.5 * (p1[1] - p1[0])
    c_new, d_new = 0.5 * (p2[0] + p2[1]), 0.5 * (p2[1] - p2[0])
    s_old = (np.asarray(others_old) - c_old) / d_old
    s_new = (np.asarray(others_new) - c_new) / d_new
    for a, b in zip(s_old, s_new):
        if a.imag == b.imag or (a.imag > 0) == (b.imag > 0):
            continue
        t = a.imag / (a.imag - b.imag)
        re = a.real + t * (b.real - a.real)
        if -1 < re < 1:
            return True
    return False


@dataclass
class RootTrack:
    """All roots of ``P = h`` continued along a path, with two marked as the cycle."""

    h: complex
    roots: np.ndarray
    pair: tuple = (0, 1)
    history: list = field(default_factory=list)

    @property
    def endpoints(self):
        return self.roots[self.pair[0]], self.roots[self.pair[1]]

    def step_to(self, h_new: complex, depth: int = 0, max_depth: int = 40):
        new = solve_level(self.m_, h_new)
        matched, dist = _match(self.roots, new)
        ok = True
        for i in self.pair:
            d_self = abs(matched[i] - self.roots[i])
            d_other = np.sort(dist[i])[1] if len(new) > 1 else math.inf
            sep = np.min(np.abs(np.delete(self.roots, i) - self.roots[i]))
            if d_self > 0.25 * sep or d_self > 0.5 * d_other:
                ok = False
        if ok:
            idx = [j for j in range(len(new)) if j not in self.pair]
            if _segment_crossed(self.endpoints, (matched[self.pair[0]], matched[self.pair[1]]),
                                self.roots[idx], matched[idx]):
                ok = False
                if depth >= max_depth:
                    raise TrackingError(f"a branch point crosses the cycle segment near h={h_new}")
        if not ok:
            if depth >= max_depth:
                raise TrackingError(f"root tracking ambiguous near h={h_new}")
            mid = 0.5 * (self.h + h_new)
            self.step_to(mid, depth + 1, max_depth)
            self.step_to(h_new, depth + 1, max_depth)
            return
        self.h = complex(h_new)
        self.roots = matched


def start_track(m: HamiltonianModel, h: complex, pair) -> RootTrack:
    roots = solve_level(m, h)
    i = int(np.argmin(np.abs(roots - pair[0])))
    j = int(np.argmin(np.abs(roots - pair[1])))
    if i == j:
        raise TrackingError("pair endpoints map to the same root")
    tr = RootTrack(complex(h), roots, (i, j))
    tr.m_ = m
    return tr


def follow(m: HamiltonianModel, h0: complex, pair, path, ks=(0, 1), align: bool = True, **kw):
    """Continue the cycle along ``path`` and evaluate ``J_k`` at every point.

    With ``align`` the canonical values are sign-flipped so that ``J_0``
    varies continuously along the path.
    """
    tr = start_track(m, h0, pair)
    out = []
    sign = 1.0
    last = None
    for h in path:
        tr.step_to(complex(h))
        res = cycle_integrals(m, tr.h, tr.endpoints, ks, roots=tr.roots, **kw)
        vals = {k: complex(v) for k, v in res.values.items()}
        if align and last is not None:
            ref_k = ks[0]
            if (sign * vals[ref_k] * np.conj(last)).real < 0:
                sign = -sign
        vals = {k: sign * v for k, v in vals.items()}
        last = vals[ks[0]]
        res.values = vals
        out.append((tr.h, tr.endpoints, res))
    return out


def _arc(center, radius, theta0, theta1, n):
    t = np.linspace(theta0, theta1, n + 1)[1:]
    return center + radius * np.exp(1j * t)


def _real_segment(a: float, b: float, anchor: float, n_per_decade: int = 24):
    """Points from ``a`` to ``b`` (same side of ``anchor``), geometric in ``|h - anchor|``."""
    da, db = abs(a - anchor), abs(b - anchor)
    side = 1.0 if (a - anchor) > 0 else -1.0
    n = max(4, int(abs(math.log10(db / da)) * n_per_decade) + 1)
    return anchor + side * np.geomspace(da, db, n + 1)[1:]


def cycle_pair(m: HamiltonianModel, a, h: float, eps_frac: float = 1e-3):
    """Branch points of the continued vanishing cycle at real ``h < h_s``.

    Inside ``Sigma`` these are the oval endpoints.  Below ``h_c`` the cycle is
    carried around ``h_c`` through a small upper half circle and then down
    the real axis; the result is ordered with the lower root first.
    """
    return cycle_pairs(m, a, [h], eps_frac)[0]


def cycle_pairs(m: HamiltonianModel, a, hs, eps_frac: float = 1e-3) -> list:
    """:func:`cycle_pair` for many levels, tracking the roots in a single sweep."""
    from .real import oval_endpoints

    h_c, h_s = a.sigma
    hs = [float(h) for h in hs]
    out = [oval_endpoints(m, a, h) if h > h_c else None for h in hs]
    below = sorted((i for i, h in enumerate(hs) if h <= h_c), key=lambda i: -hs[i])
    if not below:
        return out
    eps = eps_frac * (h_s - h_c)
    start = h_c + eps
    tr = start_track(m, start, oval_endpoints(m, a, start))
    for hp in _arc(h_c, eps, 0.0, math.pi, 32):
        tr.step_to(hp)
    pos = h_c - eps
    for i in below:
        h = hs[i]
        if h < pos:
            for hp in _real_segment(pos, h, h_c):
                tr.step_to(hp)
            pos = h
        elif h > pos:
            # inside the half circle: leave the sweep untouched
            tmp = start_track(m, start, oval_endpoints(m, a, start))
            arc = _arc(h_c, eps, 0.0, math.pi, 32)
            arc[-1] = complex(h)
            for hp in arc:
                tmp.step_to(hp)
            out[i] = _ordered(tmp.endpoints)
            continue
        out[i] = _ordered(tr.endpoints)
    return out


def _ordered(pair):
    z1, z2 = pair
    return (z2, z1) if z1.imag > z2.imag else (z1, z2)
