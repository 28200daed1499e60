"""Integrals of x**k dx/y over real ovals."""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from ..bifurcation import PeriodAnnulus
from ..hamiltonian import HamiltonianModel

DEFAULT_TOL = 1e-10
MAX_NODES = 2**16


class Method(str, enum.Enum):
    REAL_OVAL = "RealOval"
    R_CURVE = "RCurve"
    COMPLEX_CONTOUR = "ComplexContour"


class QuadratureError(RuntimeError):
    """Bracketing or positivity failure inside a quadrature."""


class OutsideSigmaError(ValueError):
    pass


@dataclass(frozen=True)
class IntegralSample:
    h: complex
    k: int
    value: complex
    error: float
    method: Method
    converged: bool = True
    nodes: int = 0

    def to_record(self) -> dict:
        h, v = complex(self.h), complex(self.value)
        return {
            "h_re": h.real,
            "h_im": h.imag,
            "k": self.k,
            "val_re": v.real,
            "val_im": v.imag,
            "err": self.error,
            "method": self.method.value,
        }


def _bracket_side(m: HamiltonianModel, h: float, start: float, direction: int) -> float:
    """A point beyond ``start`` in ``direction`` where P > h."""
    crit = [x for x in m.real_critical_points if (x - start) * direction > 0]
    crit.sort(key=lambda x: abs(x - start))
    for x in crit:
        if m.P(x) > h:
            return float(x)
    step = 1.0
    x = start + direction * step
    for _ in range(200):
        if m.P(x) > h:
            return x
        step *= 2
        x = start + direction * step
    raise QuadratureError(f"no level crossing of P = {h} found on that side")


def oval_endpoints(m: HamiltonianModel, a: PeriodAnnulus, h: float):
    """Extreme abscissae ``alpha < beta`` of the oval at level ``h``."""
    h = float(np.real(h))
    h_c, h_s = a.sigma
    if not (h_c < h < h_s):
        raise OutsideSigmaError(f"h={h!r} outside Sigma=({h_c!r}, {h_s!r})")
    lo_in, hi_in = min(a.minima), max(a.minima)
    if m.P(lo_in) >= h or m.P(hi_in) >= h:
        raise QuadratureError("interior point of the annulus is not below the level")
    left = _bracket_side(m, h, lo_in, -1)
    right = _bracket_side(m, h, hi_in, +1)
    f = lambda x: float(m.P(x)) - h
    alpha = optimize.brentq(f, left, lo_in, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    beta = optimize.brentq(f, hi_in, right, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return alpha, beta


def deflated_factor(m: HamiltonianModel, h, alpha, beta) -> np.ndarray:
    """Ascending coefficients of S with ``h - P = (x - alpha)(beta - x) S``."""
    coeffs = np.array(m.p_coeffs, dtype=complex if np.iscomplexobj(alpha) or np.iscomplexobj(beta) else float)
    coeffs = coeffs.astype(np.result_type(coeffs, h))
    coeffs[0] -= h
    quad = [alpha * beta, -(alpha + beta), 1.0]
    quot, _ = np.polynomial.polynomial.polydiv(coeffs, quad)
    return quot


def rounding_floor(m: HamiltonianModel, h, x, gap) -> float:
    """Relative error of the integrand caused by forming ``h - P`` in floating point.

    Close to ``h_c`` the gap ``h - P`` is a small difference of large values;
    quadrature refinement cannot see this error, so it is added explicitly.
    """
    terms = np.abs(np.asarray(m.p_coeffs))[None, :] * np.abs(x)[:, None] ** np.arange(len(m.p_coeffs))[None, :]
    size = abs(h) + float(np.max(np.sum(terms, axis=1)))
    return 4 * np.finfo(float).eps * size / float(np.max(gap))


def chebyshev_nodes(n: int) -> np.ndarray:
    return np.cos((2 * np.arange(1, n + 1) - 1) * np.pi / (2 * n))


def abelian_integrals(
    m: HamiltonianModel,
    a: PeriodAnnulus,
    h: float,
    ks=(0, 1),
    tol: float = DEFAULT_TOL,
    max_nodes: int = MAX_NODES,
) -> list:
    """``I_k(h)`` for several k sharing one node set.

    ``h - P`` is deflated by the two oval endpoints and the remaining smooth
    factor is integrated against the Chebyshev weight ``1/sqrt((x-a)(b-x))``.
    """
    alpha, beta = oval_endpoints(m, a, h)
    s_coeffs = deflated_factor(m, h, alpha, beta)
    ks = list(ks)
    inner = [x for x in m.real_critical_points if alpha < x < beta and x not in a.minima]
    if inner:
        # pinched ovals: Chebyshev sums stall near h_c, adaptive splitting does not
        first = _chebyshev_sums(m, h, ks, alpha, beta, s_coeffs, tol, min(max_nodes, 4096))
        if all(s.converged for s in first):
            return first
        return _split_integrals(m, h, ks, alpha, beta, s_coeffs, inner, tol)
    return _chebyshev_sums(m, h, ks, alpha, beta, s_coeffs, tol, max_nodes)


def _chebyshev_sums(m, h, ks, alpha, beta, s_coeffs, tol, max_nodes):
    mid, half = 0.5 * (alpha + beta), 0.5 * (beta - alpha)
    pref = 2.0 * math.sqrt(m.y_factor)
    prev = None
    n = 16
    while True:
        x = mid + half * chebyshev_nodes(n)
        s = np.polynomial.polynomial.polyval(x, s_coeffs)
        if np.any(s <= 0):
            raise QuadratureError("deflated factor not positive on the oval: wrong root pairing")
        w = 1.0 / np.sqrt(s)
        vals = np.array([np.sum(x**k * w) for k in ks]) * (np.pi / n)
        scale = np.array([np.sum(np.abs(x) ** k * w) for k in ks]) * (np.pi / n)
        if prev is not None:
            err = np.abs(vals - prev)
            if np.all(err <= tol * np.maximum(np.abs(vals), scale)) or 2 * n > max_nodes:
                converged = bool(np.all(err <= tol * np.maximum(np.abs(vals), scale)))
                err = err + rounding_floor(m, h, x, (x - alpha) * (beta - x) * s) * np.abs(vals)
                return [
                    IntegralSample(h, k, pref * v, pref * e, Method.REAL_OVAL, converged, n)
                    for k, v, e in zip(ks, vals, err)
                ]
        prev = vals
        n *= 2


def abelian_integral(m: HamiltonianModel, a: PeriodAnnulus, h: float, k: int = 0, **kw) -> IntegralSample:
    return abelian_integrals(m, a, h, (k,), **kw)[0]


def _split_integrals(m, h, ks, alpha, beta, s_coeffs, inner, tol):
    """Adaptive quadrature split at interior maxima of P.

    Ovals around several centers pinch near ``h_c``; the integrand then has a
    narrow peak over each interior maximum that Chebyshev sums resolve slowly.
    Near a maximum ``x_m``, ``h - P`` is expanded about ``x_m`` so that the small
    gap ``h - P(x_m)`` is not lost to cancellation.
    """
    cuts = [alpha, *sorted(inner), beta]
    pref = 2.0 * math.sqrt(m.y_factor)
    sval = lambda x: np.polynomial.polynomial.polyval(x, s_coeffs)
    taylor = {}
    for xm in inner:
        shifted = np.polynomial.Polynomial(m.p_coeffs)(np.polynomial.Polynomial([xm, 1.0])).coef
        taylor[xm] = (h - float(m.P(xm)), shifted)

    def gap(x, xm):
        g0, c = taylor[xm]
        d = x - xm
        return g0 - np.polynomial.polynomial.polyval(d, np.r_[0.0, 0.0, c[2:]])

    def near(x, lo, hi):
        w = 0.25 * (hi - lo)
        for xm in inner:
            if abs(x - xm) < w:
                return xm
        return None

    out = []
    for k in ks:
        total, err = 0.0, 0.0
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            if lo == alpha:
                L = hi - alpha

                def f(u, L=L, lo=lo, hi=hi):
                    x = alpha + L * u * u
                    xm = near(x, lo, hi)
                    if xm is None:
                        return 2 * math.sqrt(L) * x**k / math.sqrt((beta - x) * sval(x))
                    return 2 * L * u * x**k / math.sqrt(gap(x, xm))
                a_, b_ = 0.0, 1.0
            elif hi == beta:
                L = beta - lo

                def f(u, L=L, lo=lo, hi=hi):
                    x = beta - L * u * u
                    xm = near(x, lo, hi)
                    if xm is None:
                        return 2 * math.sqrt(L) * x**k / math.sqrt((x - alpha) * sval(x))
                    return 2 * L * u * x**k / math.sqrt(gap(x, xm))
                a_, b_ = 0.0, 1.0
            else:
                def f(x, lo=lo, hi=hi):
                    xm = near(x, lo, hi)
                    if xm is None:
                        return x**k / math.sqrt((x - alpha) * (beta - x) * sval(x))
                    return x**k / math.sqrt(gap(x, xm))
                a_, b_ = lo, hi
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                v, e = integrate.quad(f, a_, b_, epsabs=0.0, epsrel=tol, limit=500)
            total += v
            err += e
        ok = err <= 10 * tol * abs(total)
        xs = np.linspace(alpha, beta, 65)[1:-1]
        err += rounding_floor(m, h, xs, h - m.P(xs)) * abs(total)
        out.append(IntegralSample(h, k, pref * total, pref * err, Method.REAL_OVAL, ok, 0))
    return out
