"""Argument increase of ``I_0`` or ``F`` along the boundary of the slit disc."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..bifurcation import PeriodAnnulus
from ..hamiltonian import HamiltonianModel
from .paths import CycleWalker, arc, log_segment
from .real import oval_endpoints

PIECES = ("small_upper", "upper_side", "big_circle", "lower_side", "small_lower")


@dataclass
class WindingResult:
    r: float
    which: str
    pieces: dict
    min_re_small: float = math.nan
    n_points: int = 0
    path: list = field(default_factory=list, repr=False)

    @property
    def total(self) -> float:
        return float(sum(self.pieces.values()))

    @property
    def small_circle(self) -> float:
        return self.pieces["small_upper"] + self.pieces["small_lower"]

    def to_dict(self) -> dict:
        d = {f"arg_{k}": v for k, v in self.pieces.items()}
        d.update(r=self.r, which=self.which, total=self.total, small_circle=self.small_circle,
                 total_over_2pi=self.total / (2 * math.pi), n_points=self.n_points)
        return d


def winding(
    m: HamiltonianModel,
    a: PeriodAnnulus,
    r: float,
    which: str = "I0",
    alpha0: float = 0.0,
    n_big: int = 720,
    n_small: int = 96,
    tol: float = 1e-10,
) -> WindingResult:
    """Argument increase of ``I_0`` (``which='I0'``) or ``F = alpha0 + I_1/I_0``.

    The closed path starts at ``h_s - r`` and runs clockwise over the upper
    half of ``|h - h_s| = r``, out along the upper side of the cut to ``1/r``,
    once counter-clockwise around ``|h| = 1/r``, back along the lower side and
    over the lower half of the small circle.
    """
    if which not in ("I0", "F"):
        raise ValueError("which must be 'I0' or 'F'")
    h_c, h_s = a.sigma
    if not 0 < r < h_s - h_c:
        raise ValueError("r must be positive and smaller than the annulus width")
    R = 1.0 / r
    if R <= h_s + r:
        raise ValueError("big circle must enclose the small one")
    start = h_s - r
    walker = CycleWalker(m, start, oval_endpoints(m, a, start), (0, 1), tol)

    def value(pt):
        j0, j1 = pt.values[0], pt.values[1]
        return j0 if which == "I0" else alpha0 + j1 / j0

    pieces = {}
    visited = [walker.current]
    prev = value(walker.current)
    legs = {
        "small_upper": arc(h_s, r, math.pi, 0.0, n_small // 2),
        "upper_side": log_segment(h_s + r, R, h_s),
        "big_circle": arc(0.0, R, 0.0, 2 * math.pi, n_big),
        "lower_side": log_segment(R, h_s + r, h_s),
        "small_lower": arc(h_s, r, 0.0, -math.pi, n_small // 2),
    }
    # keep the sides exactly on the axis where the arcs meet them
    legs["upper_side"][-1] = R
    legs["lower_side"][-1] = h_s + r
    min_re_small = math.inf
    for name in PIECES:
        total = 0.0
        for h in legs[name]:
            for pt in walker.step(h):
                v = value(pt)
                total += float(np.angle(v / prev))
                prev = v
                visited.append(pt)
                if name.startswith("small"):
                    min_re_small = min(min_re_small, v.real)
        pieces[name] = total
    return WindingResult(r, which, pieces, min_re_small, len(visited), visited)
