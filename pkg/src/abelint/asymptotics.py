"""Series expansions at the center and fits at the ends of the period annulus."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import optimize

MAX_ORDER = 30


class SeriesOrderError(ValueError):
    pass


class IndecisiveFitError(RuntimeError):
    def __init__(self, message, fits=None):
        super().__init__(message)
        self.fits = fits


def _as_exact(c):
    return Fraction(c)  # floats convert exactly


@dataclass(frozen=True)
class PowerSeries:
    """Truncated series ``sum coeffs[j] x**j + O(x**(order+1))`` with exact rationals."""

    coeffs: tuple
    order: int

    def __post_init__(self):
        if self.order > MAX_ORDER:
            raise SeriesOrderError(f"order {self.order} exceeds {MAX_ORDER}")
        c = [_as_exact(x) for x in self.coeffs[: self.order + 1]]
        c += [Fraction(0)] * (self.order + 1 - len(c))
        object.__setattr__(self, "coeffs", tuple(c))

    def __getitem__(self, j):
        return self.coeffs[j] if 0 <= j <= self.order else Fraction(0)

    def __add__(self, other):
        order = min(self.order, other.order)
        return PowerSeries(tuple(self[j] + other[j] for j in range(order + 1)), order)

    def __sub__(self, other):
        order = min(self.order, other.order)
        return PowerSeries(tuple(self[j] - other[j] for j in range(order + 1)), order)

    def __mul__(self, other):
        if not isinstance(other, PowerSeries):
            return PowerSeries(tuple(c * _as_exact(other) for c in self.coeffs), self.order)
        order = min(self.order, other.order)
        out = [Fraction(0)] * (order + 1)
        for i, a in enumerate(self.coeffs[: order + 1]):
            if a:
                for j in range(order + 1 - i):
                    out[i + j] += a * other[j]
        return PowerSeries(tuple(out), order)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = PowerSeries((1,), self.order)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def derivative(self):
        return PowerSeries(tuple(j * self[j] for j in range(1, self.order + 1)), max(self.order - 1, 0))

    def compose(self, inner: "PowerSeries") -> "PowerSeries":
        """``self(inner(x))``; ``inner`` must have zero constant term."""
        if inner[0] != 0:
            raise ValueError("inner series needs zero constant term")
        order = min(self.order, inner.order)
        out = PowerSeries((0,), order)
        for c in reversed(self.coeffs[: order + 1]):
            out = out * inner + PowerSeries((c,), order)
        return out

    def __call__(self, x):
        return sum(float(c) * x**j for j, c in enumerate(self.coeffs))

    def as_floats(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs])


def sqrt_one_plus(u: PowerSeries) -> PowerSeries:
    """``sqrt(1 + u)`` for ``u`` with zero constant term (binomial series)."""
    out = PowerSeries((0,), u.order)
    coef = Fraction(1)
    power = PowerSeries((1,), u.order)
    for j in range(u.order + 1):
        out = out + power * coef
        coef = coef * (Fraction(1, 2) - j) / (j + 1)
        power = power * u
    return out


def forward_map(a, order: int) -> PowerSeries:
    """``X(x) = x * sqrt(1 + a_1 x + ... + a_{n-2} x**(n-2))``."""
    u = PowerSeries((0, *a), order)
    return PowerSeries((0, 1), order) * sqrt_one_plus(u)


def reverse(f: PowerSeries) -> PowerSeries:
    """Compositional inverse of ``f`` (``f[0] = 0``, ``f[1] != 0``)."""
    if f[0] != 0 or f[1] == 0:
        raise ValueError("series is not invertible at the origin")
    order = f.order
    g = [Fraction(0), 1 / f[1]]
    for n in range(2, order + 1):
        trial = PowerSeries(tuple(g) + (0,), n)
        comp = f.compose(trial)
        g.append(-comp[n] / f[1])
    return PowerSeries(tuple(g), order)


def reverse_series(a, order: int) -> PowerSeries:
    """``x = phi(X)`` inverting ``X = x sqrt(1 + sum a_k x**k)``."""
    if order > MAX_ORDER:
        raise SeriesOrderError(f"order {order} exceeds {MAX_ORDER}")
    a = [_as_exact(c) for c in a]
    return reverse(forward_map(a, order))


def double_factorial_ratio(m: int) -> Fraction:
    """``(2m-1)!! / (2m)!!``."""
    out = Fraction(1)
    for j in range(1, m + 1):
        out *= Fraction(2 * j - 1, 2 * j)
    return out


def c_const(m: int) -> float:
    """``c_m = 2 pi (2m-1)!!/(2m)!!``."""
    return 2 * math.pi * float(double_factorial_ratio(m))


@dataclass(frozen=True)
class CenterExpansion:
    """``I_k(t) = pi * sum coeffs_over_pi[m] t**m + O(t**(order+1))``."""

    k: int
    coeffs_over_pi: tuple
    order: int

    def coefficient(self, m: int) -> float:
        return math.pi * float(self.coeffs_over_pi[m])

    def __call__(self, t):
        return math.pi * sum(float(c) * t**m for m, c in enumerate(self.coeffs_over_pi))

    def leading(self):
        for m, c in enumerate(self.coeffs_over_pi):
            if c != 0:
                return m, math.pi * float(c)
        return None, 0.0


def center_expansion(cf, k: int, order: int) -> CenterExpansion:
    """Expansion of ``I_k(t)`` on ``y**2 + x**2 + a_1 x**3 + ... = t`` in powers of ``t``.

    With ``x = phi(X)`` the ovals become circles ``X**2 + y**2 = t`` and
    ``x**k dx = phi**k phi' dX``; only even powers of ``X`` survive.
    """
    a = cf.a if hasattr(cf, "a") else tuple(cf)
    if 2 * order + 1 > MAX_ORDER:
        raise SeriesOrderError("order too large for the series machinery")
    phi = reverse_series(a, 2 * order + 1)
    g = (phi**k) * phi.derivative() if k else phi.derivative()
    coeffs = tuple(g[2 * m] * 2 * double_factorial_ratio(m) for m in range(order + 1))
    return CenterExpansion(k, coeffs, order)


# -- endpoint fits -------------------------------------------------------


class FitModel(str, enum.Enum):
    LOG_LOOP = "LogLoop"
    HETEROCLINIC_LOG = "HeteroclinicLog"
    CUSP_POWER = "CuspPower"
    REGULAR = "RegularCenter"
    INFINITY_POWER = "InfinityPower"


CUSP_EXPONENT = -1.0 / 6.0


def _bases(d):
    return {
        FitModel.LOG_LOOP: np.column_stack([np.log(d), np.ones_like(d), d, d * np.log(d)]),
        FitModel.CUSP_POWER: np.column_stack([d**CUSP_EXPONENT, np.ones_like(d), d ** (1 / 6), d ** (1 / 3)]),
        FitModel.REGULAR: np.column_stack([np.ones_like(d), d, d**2, d**3]),
    }


def _lsq(A, v):
    scale = np.max(np.abs(A), axis=0)
    scale[scale == 0] = 1.0
    coef, *_ = np.linalg.lstsq(A / scale, v, rcond=None)
    coef = coef / scale
    resid = v - A @ coef
    return coef, float(np.sqrt(np.mean(np.abs(resid) ** 2)) / max(np.max(np.abs(v)), 1e-300))


@dataclass
class EndpointFit:
    model: FitModel
    coefficient: float
    exponent: float | None
    residual: float
    ratio: float
    coeffs: tuple = ()
    competing: dict = field(default_factory=dict)
    free_exponent: float | None = None

    def to_dict(self) -> dict:
        return {
            "model": self.model.value,
            "coefficient": self.coefficient,
            "exponent": self.exponent,
            "residual": self.residual,
            "ratio": self.ratio,
            "free_exponent": self.free_exponent,
            "competing": {k.value: v for k, v in self.competing.items()},
        }


def free_power_fit(d, v, bounds=(-0.9, -0.01)):
    """Exponent ``p`` of ``c d**p + a0 + a1 d**(1/6) + a2 d**(1/3)`` fitted freely."""
    d, v = np.asarray(d, float), np.asarray(v, float)

    def resid(p):
        A = np.column_stack([d**p, np.ones_like(d), d ** (1 / 6), d ** (1 / 3)])
        return _lsq(A, v)[1]

    res = optimize.minimize_scalar(resid, bounds=bounds, method="bounded", options={"xatol": 1e-8})
    return float(res.x), float(res.fun)


def endpoint_fit(samples, h_end: float, ratio_threshold: float = 10.0, heteroclinic: bool = False,
                 model: FitModel | None = None) -> EndpointFit:
    """Select the endpoint model of ``value(h)`` as ``h -> h_end``.

    ``samples`` are ``(h, value)`` pairs geometrically approaching ``h_end``.
    Passing ``model`` skips selection and fits that basis only.
    """
    if len(samples) < 8:
        raise ValueError("endpoint_fit needs at least 8 samples")
    h = np.array([s[0] for s in samples], dtype=float)
    v = np.array([s[1] for s in samples], dtype=float)
    d = np.abs(h - h_end)
    if np.any(d <= 0):
        raise ValueError("samples must avoid the endpoint itself")
    fits = {}
    for kind, A in _bases(d).items():
        fits[kind] = _lsq(A, v)
    ranked = sorted(fits, key=lambda k: fits[k][1])
    forced = model is not None
    if forced:
        model = FitModel.LOG_LOOP if model is FitModel.HETEROCLINIC_LOG else model
        ranked = [model] + [k for k in ranked if k is not model]
    best, second = ranked[0], ranked[1]
    r_best = max(fits[best][1], 1e-300)
    ratio = fits[second][1] / r_best
    coef = fits[best][0]
    competing = {k: fits[k][1] for k in fits}
    if ratio < ratio_threshold and not forced:
        raise IndecisiveFitError(
            f"models {best.value} and {second.value} separated by ratio {ratio:.3g} only", competing
        )
    model, exponent, free = best, None, None
    if best is FitModel.LOG_LOOP and heteroclinic:
        model = FitModel.HETEROCLINIC_LOG
    if best is FitModel.CUSP_POWER:
        exponent = CUSP_EXPONENT
        free = free_power_fit(d, v)[0]
    elif best is FitModel.REGULAR:
        exponent = 0.0
    return EndpointFit(model, float(coef[0]), exponent, fits[best][1], float(ratio), tuple(coef), competing, free)


@dataclass
class InfinityFit:
    exponent: float
    uncertainty: float
    raw_slope: float
    residual: float
    corrections: int

    def to_dict(self) -> dict:
        return dict(exponent=self.exponent, uncertainty=self.uncertainty, raw_slope=self.raw_slope,
                    residual=self.residual, corrections=self.corrections)


def _power_series_fit(h, v, corrections, step, center):
    def resid(p):
        A = np.column_stack([h ** (p - j * step) for j in range(corrections + 1)])
        return _lsq(A.astype(complex), v)[1]

    # shifting p by one step only relabels the basis, so stay within half a step of the slope
    bounds = (center - step / 2, center + step / 2)
    res = optimize.minimize_scalar(resid, bounds=bounds, method="bounded", options={"xatol": 1e-10})
    return float(res.x), float(res.fun)


def infinity_exponent_fit(hs, values, corrections: int = 2, step: float = 0.2) -> InfinityFit:
    """Exponent ``p`` in ``I(h) ~ h**p (C_0 + C_1 h**-step + ...)`` along a ray.

    The integrals at infinity expand in powers of ``h**(-1/5)``; fitting the
    first correction terms removes the bias a plain log-log slope carries
    over a few decades.  The uncertainty is the spread between fits with
    one fewer correction and over the two halves of the range.
    """
    h = np.abs(np.asarray(hs, dtype=complex))
    v = np.asarray(values, dtype=complex)
    if h.max() / h.min() < 1e3 - 1e-9:
        raise ValueError("samples must span at least 3 decades")
    raw = float(np.polyfit(np.log(h), np.log(np.abs(v)), 1)[0])
    p, r = _power_series_fit(h, v, corrections, step, raw)
    alt = [_power_series_fit(h, v, max(corrections - 1, 0), step, raw)[0]]
    half = len(h) // 2
    if half >= 2 * (corrections + 2):
        alt.append(_power_series_fit(h[:half], v[:half], corrections, step, raw)[0])
        alt.append(_power_series_fit(h[half:], v[half:], corrections, step, raw)[0])
    unc = float(max(abs(x - p) for x in alt))
    return InfinityFit(p, unc, raw, r, corrections)


# -- limits of F ---------------------------------------------------------


@dataclass
class FLimits:
    at_hc: float
    at_hs: float
    expected_hc: float | None
    expected_hs: float | None
    model_hs: str
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return dict(F_hc=self.at_hc, F_hs=self.at_hs, expected_hc=self.expected_hc,
                    expected_hs=self.expected_hs, model_hs=self.model_hs, **self.diagnostics)


def endpoint_samples(m, a, end: str, decades=(2, 10), per_decade: int = 2, ks=(0, 1)):
    """``I_k`` at ``d = |Sigma| * 10**-j`` from the given end of ``Sigma``."""
    from .quadrature import abelian_integrals

    j = np.linspace(decades[0], decades[1], (decades[1] - decades[0]) * per_decade + 1)
    d = a.width * 10.0 ** (-j)
    hs = a.h_s - d if end == "s" else a.h_c + d
    out = {k: [] for k in ks}
    for h in hs:
        for s in abelian_integrals(m, a, float(h), ks):
            out[s.k].append((float(h), float(s.value.real)))
    return out


def F_limits(m, a) -> FLimits:
    """Limits of ``F = I_1/I_0`` at both ends of ``Sigma``.

    At ``h_c`` the regular fits give ``I_1/I_0 -> x_c``.  At a loop the
    logarithmic (or cusp) coefficients dominate and their ratio is the limit.
    """
    from .bifurcation import Terminator

    if a.center is not None:
        low = endpoint_samples(m, a, "c", decades=(3, 9))
        v0 = np.array([v for _, v in low[0]])
        v1 = np.array([v for _, v in low[1]])
        d = np.array([abs(h - a.h_c) for h, _ in low[0]])
        A = np.column_stack([np.ones_like(d), d, d**2])
        f_hc = _lsq(A, v1)[0][0] / _lsq(A, v0)[0][0]
    else:
        # two centers: the lower end is itself a loop through the separating saddle
        low = endpoint_samples(m, a, "c")
        g0 = endpoint_fit(low[0], a.h_c)
        g1 = endpoint_fit(low[1], a.h_c, model=g0.model)
        f_hc = g1.coefficient / g0.coefficient if g0.model is not FitModel.REGULAR else g1.coeffs[0] / g0.coeffs[0]

    high = endpoint_samples(m, a, "s")
    hetero = a.terminator is Terminator.HETEROCLINIC_LOOP
    fit0 = endpoint_fit(high[0], a.h_s, heteroclinic=hetero)
    # I_1 may lose its singular term (saddle at x = 0), so it reuses the I_0 model
    fit1 = endpoint_fit(high[1], a.h_s, heteroclinic=hetero, model=fit0.model)
    if fit0.model is FitModel.REGULAR:
        f_hs = fit1.coeffs[0] / fit0.coeffs[0]
    else:
        f_hs = fit1.coefficient / fit0.coefficient
    expected_hs = None if hetero else a.x_s
    return FLimits(
        at_hc=float(f_hc),
        at_hs=float(f_hs),
        expected_hc=a.center,
        expected_hs=expected_hs,
        model_hs=fit0.model.value,
        diagnostics={"fit_I0": fit0.to_dict(), "fit_I1": fit1.to_dict()},
    )
