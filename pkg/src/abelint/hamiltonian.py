"""Quintic normal form, center families and their level sets.

Two conventions for the Hamiltonian are carried side by side,

    H = y_factor * y**2 + P(x),

with ``y_factor = 1/2`` for the quintic normal form and ``y_factor = 1`` for
the center family ``H = y**2 + x**2 + a_1 x**3 + ... + a_{n-2} x**n``.
Every integral in the package reads ``y_factor`` from the model.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

CONJ_PAIR_TOL = 1e-9


class InvalidParameterError(ValueError):
    """Parameter point violates the ordering or conjugacy constraints."""


class RootFindingError(RuntimeError):
    """Polynomial root polish did not reach the requested residual."""

    def __init__(self, message: str, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class Case(str, enum.Enum):
    REAL = "Real"
    COMPLEX = "Complex"


@dataclass(frozen=True)
class ParameterPoint:
    """Positions ``lam``, ``mu`` of the two middle critical points.

    Real case: ``0 <= mu <= lam <= 1``.  Complex case: ``mu = conj(lam)``
    with ``Im lam != 0``.
    """

    lam: complex
    mu: complex
    case: Case

    def __post_init__(self):
        lam, mu = complex(self.lam), complex(self.mu)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "case", Case(self.case))
        if not (np.isfinite(lam) and np.isfinite(mu)):
            raise InvalidParameterError("parameters must be finite")
        if self.case is Case.REAL:
            if lam.imag != 0 or mu.imag != 0:
                raise InvalidParameterError("real case needs real lambda and mu")
            if not (0.0 <= mu.real <= lam.real <= 1.0):
                raise InvalidParameterError(
                    f"real case needs 0 <= mu <= lambda <= 1, got mu={mu.real}, lambda={lam.real}"
                )
        else:
            if lam.imag == 0:
                raise InvalidParameterError("complex case needs Im(lambda) != 0")
            if mu != lam.conjugate():
                raise InvalidParameterError("complex case needs mu = conj(lambda)")

    @classmethod
    def real(cls, lam: float, mu: float) -> "ParameterPoint":
        return cls(complex(lam), complex(mu), Case.REAL)

    @classmethod
    def complex(cls, lam: complex) -> "ParameterPoint":
        lam = complex(lam)
        return cls(lam, lam.conjugate(), Case.COMPLEX)

    @property
    def is_real(self) -> bool:
        return self.case is Case.REAL


@dataclass(frozen=True)
class CriticalValues:
    h0: complex
    hMu: complex
    hLambda: complex
    h1: complex

    def as_dict(self) -> dict:
        return {"h0": self.h0, "hMu": self.hMu, "hLambda": self.hLambda, "h1": self.h1}


@dataclass(frozen=True)
class HamiltonianModel:
    """``H = y_factor*y**2 + P(x)`` with ``P`` given by ascending coefficients.

    ``params`` is set for the quintic normal form, ``center_family`` for the
    degree-n center family; both may be ``None`` for a bare polynomial model.
    """

    y_factor: float
    p_coeffs: np.ndarray
    critical_points: np.ndarray
    critical_values: CriticalValues | None = None
    params: ParameterPoint | None = None
    center_family: "CenterFamilyModel | None" = None
    _poly: np.polynomial.Polynomial = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        coeffs = np.asarray(self.p_coeffs)
        if np.all(np.imag(coeffs) == 0):
            coeffs = np.real(coeffs).astype(float)
        object.__setattr__(self, "p_coeffs", coeffs)
        object.__setattr__(self, "_poly", np.polynomial.Polynomial(coeffs))

    @property
    def degree(self) -> int:
        return len(self.p_coeffs) - 1

    @property
    def leading(self):
        return self.p_coeffs[-1]

    @property
    def poly(self) -> np.polynomial.Polynomial:
        return self._poly

    def P(self, x):
        return np.polynomial.polynomial.polyval(x, self.p_coeffs)

    def dP(self, x, order: int = 1):
        return np.polynomial.polynomial.polyval(x, self._poly.deriv(order).coef) if order <= self.degree else 0 * x

    def H(self, x, y):
        return self.y_factor * y * y + self.P(x)

    @property
    def real_critical_points(self) -> np.ndarray:
        pts = np.asarray(self.critical_points)
        real = pts[np.abs(np.imag(pts)) <= 1e-12 * np.maximum(1.0, np.abs(pts))]
        return np.sort(np.real(real))


@dataclass(frozen=True)
class CenterFamilyModel:
    """``H = y**2 + x**2 + a_1 x**3 + ... + a_{n-2} x**n``."""

    a: tuple

    def __post_init__(self):
        a = tuple(self.a)
        object.__setattr__(self, "a", a)
        if len(a) < 2:
            raise InvalidParameterError("center family needs degree n >= 4")
        if a[-1] == 0:
            raise InvalidParameterError("leading coefficient a_{n-2} must be nonzero")

    @property
    def degree(self) -> int:
        return len(self.a) + 2

    @property
    def genus(self) -> int:
        return (self.degree - 1) // 2

    def p_coeffs(self) -> list:
        return [0, 0, 1, *self.a]


def normal_form_coeffs(lam, mu) -> list:
    """Ascending coefficients of P in the quintic normal form."""
    return [
        0.0,
        0.0,
        -lam * mu / 2,
        (lam + mu + lam * mu) / 3,
        -(1 + lam + mu) / 4,
        0.2,
    ]


def critical_values_closed_form(lam, mu) -> CriticalValues:
    h1 = -(3 - 5 * lam - 5 * mu + 10 * lam * mu) / 60
    h_lam = -(lam**3) / 60 * (3 * lam**2 - 5 * lam * mu - 5 * lam + 10 * mu)
    h_mu = -(mu**3) / 60 * (3 * mu**2 - 5 * lam * mu - 5 * mu + 10 * lam)
    return CriticalValues(h0=0.0, hMu=h_mu, hLambda=h_lam, h1=h1)


def _maybe_real(z: complex, real: bool):
    return complex(z).real if real else complex(z)


def build_normal_form(p: ParameterPoint) -> HamiltonianModel:
    lam, mu = p.lam, p.mu
    coeffs = normal_form_coeffs(lam, mu)
    if p.is_real:
        coeffs = [complex(c).real for c in coeffs]
    else:
        # mu = conj(lam) makes every coefficient real
        coeffs = [complex(c).real for c in coeffs]
    cv = critical_values_closed_form(lam, mu)
    cv = CriticalValues(*(_maybe_real(v, p.is_real) for v in (cv.h0, cv.hMu, cv.hLambda, cv.h1)))
    crit = np.array([0.0, mu, lam, 1.0], dtype=complex)
    if p.is_real:
        crit = crit.real
    return HamiltonianModel(
        y_factor=0.5,
        p_coeffs=np.array(coeffs),
        critical_points=crit,
        critical_values=cv,
        params=p,
    )


def build_center_family(cf: CenterFamilyModel) -> HamiltonianModel:
    coeffs = np.array([float(c) for c in cf.p_coeffs()])
    dpoly = np.polynomial.Polynomial(coeffs).deriv()
    crit = _sort_roots(dpoly.roots().astype(complex))
    return HamiltonianModel(
        y_factor=1.0,
        p_coeffs=coeffs,
        critical_points=crit,
        critical_values=None,
        center_family=cf,
    )


def critical_values(m: HamiltonianModel) -> CriticalValues:
    """Critical levels of the normal form, from the closed forms."""
    if m.params is None:
        raise ValueError("critical_values needs a normal-form model")
    return m.critical_values


def derivatives(m: HamiltonianModel, x) -> dict:
    """``P`` and its first four derivatives at ``x`` (Horner evaluation)."""
    out = {"P": m.P(x)}
    names = ["dP", "d2P", "d3P", "d4P"]
    for order, name in enumerate(names, start=1):
        out[name] = m.dP(x, order)
    return out


def _sort_roots(roots: np.ndarray, tol: float = CONJ_PAIR_TOL) -> np.ndarray:
    """Sort by (real, imag) after snapping conjugate pairs to exact conjugates."""
    roots = np.array(roots, dtype=complex)
    n = len(roots)
    used = np.zeros(n, dtype=bool)
    scale = max(1.0, float(np.max(np.abs(roots)))) if n else 1.0
    for i in range(n):
        if used[i]:
            continue
        z = roots[i]
        if abs(z.imag) <= tol * scale:
            continue
        target = z.conjugate()
        best, best_d = -1, np.inf
        for j in range(n):
            if j == i or used[j]:
                continue
            d = abs(roots[j] - target)
            if d < best_d:
                best, best_d = j, d
        if best >= 0 and best_d <= tol * scale:
            re = 0.5 * (z.real + roots[best].real)
            im = 0.5 * (abs(z.imag) + abs(roots[best].imag))
            roots[i] = complex(re, im if z.imag > 0 else -im)
            roots[best] = roots[i].conjugate()
            used[i] = used[best] = True
    order = np.lexsort((roots.imag, roots.real))
    return roots[order]


def solve_level(m: HamiltonianModel, h, tol: float = 1e-12, real_coeffs: bool | None = None) -> np.ndarray:
    """All roots of ``P(x) = h`` with multiplicity.

    Companion-matrix eigenvalues followed by one Newton polish per root; the
    result is sorted by real part then imaginary part, with conjugate pairs
    symmetrized when ``P - h`` has real coefficients.
    """
    coeffs = np.array(m.p_coeffs, dtype=complex)
    coeffs[0] -= h
    roots = np.polynomial.polynomial.polyroots(coeffs)
    dcoeffs = np.polynomial.polynomial.polyder(coeffs)
    polished = roots.copy()
    for i, r in enumerate(roots):
        f = np.polynomial.polynomial.polyval(r, coeffs)
        df = np.polynomial.polynomial.polyval(r, dcoeffs)
        if df != 0:
            cand = r - f / df
            fc = np.polynomial.polynomial.polyval(cand, coeffs)
            if abs(fc) <= abs(f):
                polished[i] = cand
    if real_coeffs is None:
        real_coeffs = bool(np.all(np.imag(coeffs) == 0))
    if real_coeffs:
        polished = _sort_roots(polished)
    else:
        polished = polished[np.lexsort((polished.imag, polished.real))]
    scale = max(1.0, abs(h)) * max(1.0, float(np.max(np.abs(coeffs))))
    resid = np.abs(np.polynomial.polynomial.polyval(polished, coeffs))
    bound = tol * scale * np.maximum(1.0, np.abs(polished)) ** m.degree
    if np.any(resid > np.maximum(bound, 1e3 * tol * scale)):
        raise RootFindingError("root polish failed to converge", residuals=resid)
    return polished


def duality_partner(p: ParameterPoint) -> ParameterPoint:
    """Parameters ``(1 - mu, 1 - lam)`` of the dual Hamiltonian."""
    if p.is_real:
        return ParameterPoint.real(1 - p.mu.real, 1 - p.lam.real)
    lam = 1 - p.mu
    return ParameterPoint.complex(lam)


def rational_normal_form(lam: Fraction, mu: Fraction) -> list:
    """Exact ascending coefficients of P for rational parameters."""
    lam, mu = Fraction(lam), Fraction(mu)
    return [
        Fraction(0),
        Fraction(0),
        -lam * mu / 2,
        (lam + mu + lam * mu) / 3,
        -(1 + lam + mu) / 4,
        Fraction(1, 5),
    ]
