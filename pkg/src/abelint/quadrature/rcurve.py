"""Continuation of ``I_0`` below the center level along the curve ``R = 0``.

Writing ``P(x + i y) = Q(x, y) + i y R(x, y)``, the branch of ``R = 0`` that
leaves the center vertically carries ``P`` real.  Along it the cycle
integral reduces to a real integral in ``y``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import factorial

import numpy as np
from scipy import interpolate, optimize

from ..bifurcation import PeriodAnnulus
from ..hamiltonian import HamiltonianModel, solve_level
from .real import DEFAULT_TOL, IntegralSample, Method, QuadratureError


class RBranchError(QuadratureError):
    """The branch of ``R = 0`` could not be followed to the level ``h``."""


@dataclass
class RBranch:
    y: np.ndarray
    x: np.ndarray
    y_h: float
    beta: complex
    residual: float

    def x_at(self, y):
        return interpolate.CubicSpline(self.y, self.x)(y)


class _QR:
    """Vectorized ``Q``, ``R`` and partial derivatives from the Taylor form in ``y``."""

    def __init__(self, m: HamiltonianModel):
        poly = np.polynomial.Polynomial(m.p_coeffs)
        self.n = m.degree
        self.derivs = [poly.deriv(j).coef / factorial(j) if j else poly.coef for j in range(self.n + 1)]
        self.derivs2 = [poly.deriv(j + 1).coef / factorial(j) for j in range(self.n + 1)]

    def _d(self, j, x, first=False):
        c = self.derivs2[j] if first else self.derivs[j]
        return np.polynomial.polynomial.polyval(x, c)

    def Q(self, x, y):
        out = 0.0
        for j in range(0, self.n + 1, 2):
            out = out + (-1) ** (j // 2) * y**j * self._d(j, x)
        return out

    def R(self, x, y):
        out = 0.0
        for j in range(1, self.n + 1, 2):
            out = out + (-1) ** ((j - 1) // 2) * y ** (j - 1) * self._d(j, x)
        return out

    def R_x(self, x, y):
        out = 0.0
        for j in range(1, self.n + 1, 2):
            out = out + (-1) ** ((j - 1) // 2) * y ** (j - 1) * self._d(j, x, first=True)
        return out

    def R_y(self, x, y):
        out = 0.0
        for j in range(3, self.n + 1, 2):
            out = out + (-1) ** ((j - 1) // 2) * (j - 1) * y ** (j - 2) * self._d(j, x)
        return out


def _newton_x(qr: _QR, x, y, tol=1e-14, maxit=30):
    x = np.array(x, dtype=float)
    for it in range(maxit):
        r = qr.R(x, y)
        rx = qr.R_x(x, y)
        dx = r / rx
        x = x - dx
        if np.all(np.abs(dx) <= tol * np.maximum(1.0, np.abs(x))):
            return x, it + 1
    raise RBranchError("Newton on R(x, y) = 0 did not converge")


def trace_R_branch(m: HamiltonianModel, a: PeriodAnnulus, h: float, max_steps: int = 100000) -> RBranch:
    """Follow ``R = 0`` from the center up to the height where ``Q = h``."""
    if a.center is None:
        raise RBranchError("R-curve continuation needs a single center")
    x_c = float(a.center)
    h_c = a.h_c
    h = float(h)
    if not h < h_c:
        raise ValueError("R-curve continuation is for h below h_c")
    qr = _QR(m)
    p2 = float(m.dP(x_c, 2))
    if p2 <= 0:
        raise RBranchError("center is not a nondegenerate minimum")
    y_est = math.sqrt(2 * (h_c - h) / p2)
    # keep the traced samples dense enough to seed Newton at quadrature nodes
    dy_max = float(np.max(np.abs(solve_level(m, h).imag))) / 64
    dy = min(y_est / 50, dy_max)
    ys, xs = [0.0], [x_c]
    y, x = 0.0, x_c
    rx_sign = np.sign(qr.R_x(x, y))
    for _ in range(max_steps):
        slope = -qr.R_y(x, y) / qr.R_x(x, y)
        y_new = y + dy
        try:
            x_new, its = _newton_x(qr, x + slope * dy, y_new, maxit=8)
        except RBranchError:
            dy /= 2
            if dy < 1e-14 * max(1.0, y):
                raise RBranchError("step size underflow while tracing R = 0")
            continue
        x_new = float(x_new)
        if abs(x_new - (x + slope * dy)) > 0.1 * dy * max(1.0, abs(slope)):
            # corrector moved too far: possible jump to another branch
            dy /= 2
            if dy < 1e-14 * max(1.0, y):
                raise RBranchError("step size underflow while tracing R = 0")
            continue
        if np.sign(qr.R_x(x_new, y_new)) != rx_sign:
            raise RBranchError("R = 0 turns back in y before reaching the level")
        q_new = float(qr.Q(x_new, y_new)) - h
        ys.append(y_new)
        xs.append(x_new)
        if q_new <= 0:
            def g(t):
                seed = x + (x_new - x) * (t - y) / (y_new - y)
                xt = float(_newton_x(qr, seed, t)[0])
                return float(qr.Q(xt, t)) - h

            # either end may sit on the level up to rounding
            if g(y) <= 0:
                y_h = y
            elif g(y_new) >= 0:
                y_h = y_new
            else:
                y_h = optimize.brentq(g, y, y_new, xtol=1e-16, rtol=4 * np.finfo(float).eps)
            x_h = float(_newton_x(qr, x + (x_new - x) * (y_h - y) / (y_new - y), y_h)[0])
            z = complex(x_h, y_h)
            roots = solve_level(m, h)
            beta = roots[np.argmin(np.abs(roots - z))]
            resid = abs(beta - z)
            if resid > 1e-6 * max(1.0, abs(z)):
                raise RBranchError(f"branch end {z} is not a root of P = h (gap {resid:.3g})")
            # the end replaces every sample at or past it, keeping y strictly increasing
            while ys and ys[-1] >= y_h * (1 - 1e-12):
                ys.pop()
                xs.pop()
            ys.append(y_h)
            xs.append(x_h)
            return RBranch(np.array(ys), np.array(xs), float(beta.imag), complex(beta), resid)
        y, x = y_new, x_new
        if its <= 3:
            dy = min(1.5 * dy, dy_max)
    raise RBranchError("too many steps while tracing R = 0")


def continued_integral(
    m: HamiltonianModel,
    a: PeriodAnnulus,
    h: float,
    tol: float = DEFAULT_TOL,
    max_nodes: int = 2**14,
) -> IntegralSample:
    """``I_0(h)`` for ``h < h_c`` as ``4 sqrt(y_factor) * int_0^{y_h} dy / sqrt(Q - h)``."""
    br = trace_R_branch(m, a, h)
    qr = _QR(m)
    roots = solve_level(m, h)
    lc = m.leading
    y_h = br.y_h
    x_of_y = interpolate.CubicSpline(br.y, br.x)
    pref = 4.0 * math.sqrt(m.y_factor)
    prev = None
    n = 16
    while True:
        u, w = np.polynomial.legendre.leggauss(n)
        u = 0.5 * math.sqrt(y_h) * (u + 1.0)
        w = 0.5 * math.sqrt(y_h) * w
        y = y_h - u * u
        x, _ = _newton_x(qr, x_of_y(y), y)
        z = x + 1j * y
        q_direct = qr.Q(x, y) - h
        if np.any(q_direct[y < 0.99 * y_h] <= 0):
            raise QuadratureError("Q - h changes sign on the R-branch")
        # product form keeps relative accuracy close to the branch end
        q = np.real(lc * np.prod(z[:, None] - roots[None, :], axis=1))
        val = float(np.sum(w * 2 * u / np.sqrt(q)))
        if prev is not None:
            err = abs(val - prev)
            if err <= tol * abs(val) or 2 * n > max_nodes:
                return IntegralSample(h, 0, pref * val, pref * err, Method.R_CURVE, err <= tol * abs(val), n)
        prev = val
        n *= 2
