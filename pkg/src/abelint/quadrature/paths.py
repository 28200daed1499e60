"""Continuation of a vanishing cycle along paths in the h-plane."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..hamiltonian import HamiltonianModel
from .contour import ContourResult, TrackingError, cycle_integrals, start_track
from .real import oval_endpoints

MAX_VALUE_ARG_STEP = math.pi / 16


@dataclass
class PathPoint:
    h: complex
    pair: tuple
    values: dict
    errors: dict
    nodes: int


class CycleWalker:
    """Carry a cycle and its signed integrals along a piecewise path.

    Steps are bisected whenever root matching is ambiguous or ``J_0`` turns
    by more than ``max_arg_step`` between consecutive points.
    """

    def __init__(self, m: HamiltonianModel, h0: complex, pair, ks=(0, 1), tol=1e-10,
                 max_arg_step=MAX_VALUE_ARG_STEP, max_depth=30):
        self.m = m
        self.ks = tuple(ks)
        self.tol = tol
        self.max_arg_step = max_arg_step
        self.max_depth = max_depth
        self.track = start_track(m, h0, pair)
        res = self._eval()
        self.sign = 1.0
        self.current = self._point(res)

    def _eval(self) -> ContourResult:
        return cycle_integrals(self.m, self.track.h, self.track.endpoints, self.ks,
                               roots=self.track.roots, tol=self.tol)

    def _point(self, res) -> PathPoint:
        vals = {k: self.sign * complex(v) for k, v in res.values.items()}
        return PathPoint(self.track.h, self.track.endpoints, vals, dict(res.errors), res.nodes)

    def step(self, h_new: complex, depth: int = 0) -> list:
        """Advance to ``h_new``; returns every point visited (subdivisions included)."""
        saved = (self.track.h, self.track.roots.copy())
        prev = self.current
        self.track.step_to(complex(h_new))
        res = self._eval()
        v0 = complex(res.values[self.ks[0]])
        ref = prev.values[self.ks[0]]
        if (self.sign * v0 * np.conj(ref)).real < 0:
            self.sign = -self.sign
        turn = abs(np.angle(self.sign * v0 / ref))
        if turn > self.max_arg_step:
            if depth >= self.max_depth:
                raise TrackingError(f"integral changes too fast near h={h_new}")
            self.track.h, self.track.roots = saved
            mid = 0.5 * (prev.h + complex(h_new))
            return self.step(mid, depth + 1) + self.step(h_new, depth + 1)
        self.current = self._point(res)
        return [self.current]

    def walk(self, path) -> list:
        out = []
        for h in path:
            out.extend(self.step(h))
        return out


def arc(center: complex, radius: float, theta0: float, theta1: float, n: int) -> np.ndarray:
    t = np.linspace(theta0, theta1, n + 1)[1:]
    return center + radius * np.exp(1j * t)


def log_segment(a: float, b: float, anchor: float, per_decade: int = 16) -> np.ndarray:
    """Real points from ``a`` to ``b`` spaced geometrically in the distance to ``anchor``."""
    da, db = abs(a - anchor), abs(b - anchor)
    side = 1.0 if a > anchor else -1.0
    n = max(4, int(abs(math.log10(db / da)) * per_decade) + 1)
    return anchor + side * np.geomspace(da, db, n + 1)[1:]


def _other_critical_gap(m: HamiltonianModel, h_s: float) -> float:
    cv = m.critical_values
    if cv is None:
        vals = [complex(m.P(x)) for x in np.asarray(m.critical_points)]
    else:
        vals = [complex(v) for v in cv.as_dict().values()]
    gaps = [abs(v - h_s) for v in vals if abs(v - h_s) > 1e-14 * max(1.0, abs(h_s))]
    return min(gaps) if gaps else math.inf


def detour_radius(m: HamiltonianModel, a, targets=()) -> float:
    """Radius of the half circle used to pass around ``h_s``."""
    h_c, h_s = a.sigma
    rho = min(0.5 * (h_s - h_c), 0.5 * _other_critical_gap(m, h_s))
    for h in targets:
        if h > h_s:
            rho = min(rho, 0.5 * (h - h_s))
    return rho


def determination_walk(m: HamiltonianModel, a, targets, side: int = +1, ks=(0, 1), tol=1e-10):
    """Values on ``delta^+`` (side=+1) or ``delta^-`` (side=-1) at real ``targets > h_s``.

    The cycle leaves the real oval at ``h_s - rho``, passes around ``h_s``
    through the upper (lower) half plane and then runs along the real axis.
    Returned points are in the order of ``targets``.
    """
    h_c, h_s = a.sigma
    targets = np.asarray(targets, dtype=float)
    if np.any(targets <= h_s):
        raise ValueError("determinations are defined for h > h_s")
    rho = detour_radius(m, a, targets)
    start = h_s - rho
    alpha, beta = oval_endpoints(m, a, start)
    walker = CycleWalker(m, start, (alpha, beta), ks, tol)
    walker.walk(arc(h_s, rho, math.pi, 0.0 if side > 0 else 2 * math.pi, 48))
    order = np.argsort(targets)
    found = {}
    pos = h_s + rho
    for idx in order:
        h = float(targets[idx])
        if h > pos:
            path = log_segment(pos, h, h_s)
            path[-1] = h
            walker.walk(path)
            pos = h
        found[idx] = walker.current
    return [found[i] for i in range(len(targets))]
