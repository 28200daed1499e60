"""Zero counting for combinations of Abelian integrals over a period annulus."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import optimize

from .asymptotics import c_const, center_expansion
from .bifurcation import (
    AnnulusKind,
    PeriodAnnulus,
    center_family_annulus,
    classify,
    in_omega_e,
    in_omega_mu,
    mu_on_gamma,
    mu_on_gamma_c,
)
from .hamiltonian import CenterFamilyModel, HamiltonianModel, ParameterPoint, build_center_family, build_normal_form
from .parallel import map_ordered
from .quadrature import abelian_integrals

GRID_SIZE = 2000
GRID_SPAN = math.log(1e8)


class BoundViolation(RuntimeError):
    """A proved zero bound was exceeded."""


class GridTooCoarse(RuntimeError):
    pass


def sigma_grid(a: PeriodAnnulus, n: int = GRID_SIZE, span: float = GRID_SPAN) -> np.ndarray:
    """Points of ``Sigma`` clustered geometrically towards both ends.

    The clustering stops where the offset from an end would drop below the
    rounding level of the energies, so thin annuli get a shorter span.
    """
    floor = 1e4 * np.finfo(float).eps * max(abs(a.h_c), abs(a.h_s))
    if floor > 0:
        span = min(span, math.log(a.width / floor))
    if span < math.log(10.0):
        raise GridTooCoarse(f"width {a.width:.3e} of Sigma is at the rounding level of its ends")
    t = np.linspace(-span, span, n)
    s = 1.0 / (1.0 + np.exp(-t))
    return a.h_c + a.width * s


@dataclass
class FTable:
    """``I_0``, ``I_1`` and ``F = I_1/I_0`` on a grid, with error bars."""

    h: np.ndarray
    I0: np.ndarray
    I1: np.ndarray
    err0: np.ndarray
    err1: np.ndarray

    @property
    def F(self) -> np.ndarray:
        return self.I1 / self.I0

    @property
    def errF(self) -> np.ndarray:
        return (self.err1 + np.abs(self.F) * self.err0) / np.abs(self.I0)

    def combination(self, alpha0: float, alpha1: float):
        v = alpha0 * self.I0 + alpha1 * self.I1
        e = abs(alpha0) * self.err0 + abs(alpha1) * self.err1
        return v, e


def eval_F(m: HamiltonianModel, a: PeriodAnnulus, hs=None, tol: float = 1e-10) -> FTable:
    hs = sigma_grid(a) if hs is None else np.asarray(hs, dtype=float)

    def one(h):
        s0, s1 = abelian_integrals(m, a, float(h), (0, 1), tol=tol)
        return s0.value.real, s1.value.real, s0.error, s1.error

    rows = np.array(map_ordered(one, hs))
    if np.any(np.abs(rows[:, 0]) <= rows[:, 2]):
        raise ArithmeticError("I_0 below its error floor on the grid")
    return FTable(hs, rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3])


@dataclass
class ZeroReport:
    zeros: list
    count: int
    grid_size: int
    refined: bool
    alphas: tuple
    suspected_double: list = field(default_factory=list)
    interval: tuple = ()

    def to_dict(self) -> dict:
        return {
            "zeros": [{"h": h, "multiplicity": k} for h, k in self.zeros],
            "count": self.count,
            "grid_size": self.grid_size,
            "refined": self.refined,
            "alphas": list(self.alphas),
            "suspected_double": list(self.suspected_double),
            "interval": list(self.interval),
        }


def _sign_changes(v: np.ndarray, err: np.ndarray | None = None) -> list:
    """Index pairs ``(i, j)`` bracketing a sign change.

    Samples with ``|v| <= err`` carry no reliable sign and are skipped, so
    a bracket may span several grid cells.
    """
    v = np.asarray(v)
    keep = np.ones(len(v), bool) if err is None else np.abs(v) > np.asarray(err)
    idx = np.nonzero(keep & (v != 0))[0]
    s = np.sign(v[idx])
    flips = np.nonzero(s[:-1] * s[1:] < 0)[0]
    return [(int(idx[k]), int(idx[k + 1])) for k in flips]


def _interior_extrema(v: np.ndarray) -> np.ndarray:
    d = np.diff(v)
    return np.nonzero(d[:-1] * d[1:] < 0)[0] + 1


def zeros_of(func, h: np.ndarray, v: np.ndarray, err: np.ndarray, xtol: float, refine: bool = True):
    """Sign-change zeros of sampled ``v = func(h)`` plus near-touching extrema."""
    zeros = []
    for i, j in _sign_changes(v, err):
        if refine:
            z = optimize.brentq(func, h[i], h[j], xtol=xtol)
        else:
            z = h[i] - v[i] * (h[j] - h[i]) / (v[j] - v[i])
        zeros.append((float(z), 1))
    suspected = []
    for i in _interior_extrema(np.abs(v)):
        if abs(v[i]) < abs(v[i - 1]) and abs(v[i]) < abs(v[i + 1]) and np.sign(v[i - 1]) == np.sign(v[i + 1]):
            if abs(v[i]) < 10 * err[i]:
                suspected.append(float(h[i]))
                zeros.append((float(h[i]), 2))
    zeros.sort()
    return zeros, suspected


def count_zeros(
    m: HamiltonianModel,
    a: PeriodAnnulus,
    alpha0: float,
    alpha1: float,
    grid=None,
    refine: bool = True,
    table: FTable | None = None,
    tol: float = 1e-10,
) -> ZeroReport:
    """Zeros of ``alpha0*I_0 + alpha1*I_1`` on ``Sigma``."""
    if alpha0 == 0 and alpha1 == 0:
        raise ValueError("(alpha0, alpha1) must not vanish")
    if table is None:
        table = eval_F(m, a, grid, tol=tol)
    v, e = table.combination(alpha0, alpha1)

    def func(h):
        s0, s1 = abelian_integrals(m, a, float(h), (0, 1), tol=tol)
        return alpha0 * s0.value.real + alpha1 * s1.value.real

    zeros, suspected = zeros_of(func, table.h, v, e, 1e-12 * a.width, refine)
    count = sum(k for _, k in zeros)
    return ZeroReport(zeros, count, len(table.h), refine, (alpha0, alpha1), suspected, tuple(a.sigma))


@dataclass
class MaxZeroReport:
    max_zeros: int
    extrema: list
    indeterminate: list
    direction_max: int | None = None

    def to_dict(self) -> dict:
        return {
            "max_zeros": self.max_zeros,
            "extrema": [{"h": h, "F": f} for h, f in self.extrema],
            "indeterminate": self.indeterminate,
            "direction_max": self.direction_max,
        }


def max_zero_count(m: HamiltonianModel, a: PeriodAnnulus, grid=None, table: FTable | None = None,
                   directions: int = 0) -> MaxZeroReport:
    """``1 +`` the number of strict interior extrema of ``F`` on the grid.

    Level sets of ``F`` are the zero sets of ``alpha0*I_0 + alpha1*I_1``, so
    this is the sharp maximum of the zero count over all directions.
    Optionally the sign-change count is also maximised over ``directions``
    equally spaced angles.
    """
    if table is None:
        table = eval_F(m, a, grid)
    F, eF = table.F, table.errF
    ext = _interior_extrema(F)
    extrema, indeterminate = [], []
    for i in ext:
        lo, hi = max(i - 3, 0), min(i + 3, len(F) - 1)
        rise = min(abs(F[i] - F[lo]), abs(F[i] - F[hi]))
        if rise <= 10 * max(eF[lo], eF[i], eF[hi]):
            indeterminate.append(float(table.h[i]))
            continue
        extrema.append((float(table.h[i]), float(F[i])))
    dmax = None
    if directions:
        dmax = direction_scan(table, directions)
    return MaxZeroReport(1 + len(extrema), extrema, indeterminate, dmax)


def direction_scan(table: FTable, directions: int) -> int:
    """Largest sign-change count of ``cos(t) I_0 + sin(t) I_1`` over sampled angles."""
    theta = np.pi * np.arange(directions) / directions  # antipodal directions repeat
    best = 0
    for t in theta:
        v, e = table.combination(math.cos(t), math.sin(t))
        best = max(best, len(_sign_changes(v, e)))
    return best


# -- small-amplitude constructions on center families ---------------------


def _combo_on(m, a, coeffs, ts, tol=1e-12):
    """``int G(x) dx/y`` at levels ``ts`` with ``G = sum coeffs[k] x**k``."""
    ks = tuple(range(len(coeffs)))

    def one(t):
        ss = abelian_integrals(m, a, float(t), ks, tol=tol)
        v = sum(c * s.value.real for c, s in zip(coeffs, ss))
        e = sum(abs(c) * s.error for c, s in zip(coeffs, ss))
        scale = sum(abs(c * s.value.real) for c, s in zip(coeffs, ss))
        return v, max(e, 1e-15 * scale)

    out = np.array(map_ordered(one, ts))
    return out[:, 0], out[:, 1]


def _count_on_levels(m, a, coeffs, lo, hi, n=600):
    ts = np.geomspace(lo, hi, n)
    v, e = _combo_on(m, a, coeffs, ts)
    func = lambda t: _combo_on(m, a, coeffs, [t])[0][0]
    zeros, suspected = zeros_of(func, ts, v, e, 1e-12 * lo)
    return zeros, suspected, len(ts)


@dataclass
class CyclicityResult:
    a: tuple
    alpha0: float
    alpha1: float
    epsilon: float
    predicted: list
    report: ZeroReport
    double_zero_order: float
    retries: int

    def to_dict(self) -> dict:
        return {
            "a1": self.a[0],
            "a2": self.a[1],
            "a3": self.a[2],
            "alpha0": self.alpha0,
            "alpha1": self.alpha1,
            "epsilon": self.epsilon,
            "predicted_zeros": self.predicted,
            "double_zero_order": self.double_zero_order,
            "retries": self.retries,
            **{f"report_{k}": v for k, v in self.report.to_dict().items()},
        }


def cyclicity_predicted_zeros(a1, a2, a3, alpha0, alpha1=1.0) -> list:
    """Positive roots of the two-term small-t expansion divided by ``2 pi``."""
    quad = (15.0 / 16.0) * (21.0 / 8.0 * a1**3 - 3.5 * a1 * a2 + a3) * alpha1
    roots = np.roots([-quad, -0.75 * a1 * alpha1, alpha0])
    return sorted(float(r.real) for r in roots if abs(r.imag) < 1e-14 and r.real > 0)


def cyclicity_experiment(a2: float, a3: float, a1: float | None = None, alpha0: float | None = None,
                         alpha1: float = 1.0, max_retries: int = 6) -> CyclicityResult:
    """Two small zeros of ``alpha0 I_0 + alpha1 I_1`` on ``y^2 + x^2 + a1 x^3 + a2 x^4 + a3 x^5 = t``.

    Defaults follow the sign pattern ``alpha0*a1 > 0 > a1*a3`` with
    ``|alpha0| << |a1| << |a3|``.  The interval ``(0, epsilon)`` is taken from
    the roots of the expansion, and must stay below the saddle level.
    """
    if a3 == 0:
        raise ValueError("a3 must be nonzero")
    if a1 is None:
        a1 = -math.copysign(0.05 * abs(a3), a3)
    if alpha0 is None:
        alpha0 = math.copysign(2e-3 * abs(a1), a1 * alpha1)
    for retry in range(max_retries + 1):
        cf = CenterFamilyModel((a1, a2, a3))
        m = build_center_family(cf)
        ann = center_family_annulus(m)
        pred = cyclicity_predicted_zeros(a1, a2, a3, alpha0, alpha1)
        eps = 2.0 * max(pred) if pred else 0.1 * ann.h_s
        if eps < ann.h_s:
            lo = min(pred) * 1e-4 if pred else eps * 1e-6
            zeros, suspected, n = _count_on_levels(m, ann, [alpha0, alpha1], lo, eps)
            report = ZeroReport(zeros, sum(k for _, k in zeros), n, True, (alpha0, alpha1), suspected, (0.0, eps))
            if report.count == 2:
                break
        a1 /= 10
        alpha0 /= 100
    # alpha0 = a1 = 0: I_1 alone vanishes to second order at t = 0
    m0 = build_center_family(CenterFamilyModel((0.0, a2, a3)))
    ann0 = center_family_annulus(m0)
    ts = ann0.h_s * np.array([1e-6, 1e-5])
    v, _ = _combo_on(m0, ann0, [0.0, 1.0], ts)
    order = float(np.log(abs(v[1] / v[0])) / np.log(ts[1] / ts[0]))
    return CyclicityResult((a1, a2, a3), alpha0, alpha1, eps, pred, report, order, retry)


@dataclass
class NochebResult:
    genus: int
    a: tuple
    gammas: tuple
    ratio: float
    expected: int
    report: ZeroReport
    retries: int

    def to_dict(self) -> dict:
        return {
            "genus": self.genus,
            "a": list(self.a),
            "G_coeffs": list(self.gammas),
            "ratio": self.ratio,
            "expected": self.expected,
            "retries": self.retries,
            **{f"report_{k}": v for k, v in self.report.to_dict().items()},
        }


def _odd_linear_coeffs(g: int, m_half: int) -> list:
    """``kappa_j``: ``I_{2m-1}(t)`` has ``kappa_j a_{2j-1} t**(m+j-1)`` as its linear part."""
    n = 2 * g + 1
    out = []
    for j in range(1, g + 1):
        a = [Fraction(0)] * (n - 2)
        a[2 * j - 2] = Fraction(1)
        exp = center_expansion(tuple(a), 2 * m_half - 1, m_half + j - 1)
        out.append(math.pi * float(exp.coeffs_over_pi[m_half + j - 1]))
    return out


def nocheb_design(g: int, ratio: float):
    """Odd ``a``'s and ``G`` coefficients giving scale-separated small zeros.

    The expansion of ``int G dx/y`` is, to leading order, a polynomial in
    ``t`` whose coefficients are ``gamma_{2k} c_k`` followed by
    ``-kappa_j a_{2j-1}``.  Alternating signs with magnitudes
    ``ratio**(1 + (N-j)(N-j+1)/2)`` put one root near each ``ratio**(N-j)``.
    """
    m_half = g // 2
    N = m_half + g - 1
    mags = [ratio ** (1 + (N - j) * (N - j + 1) / 2) for j in range(N + 1)]
    b = [(-1) ** j * mags[j] for j in range(N + 1)]
    kappa = _odd_linear_coeffs(g, m_half)
    G = [0.0] * (2 * m_half)
    for k in range(m_half):
        G[2 * k] = b[k] / c_const(k)
    G[2 * m_half - 1] = -1.0
    a = [0.0] * (2 * g - 1)
    for j in range(1, g + 1):
        a[2 * j - 2] = -b[m_half + j - 1] / kappa[j - 1]
    return tuple(a), tuple(G), N


def nocheb_experiment(g: int, ratio: float = 0.1, max_retries: int = 6) -> NochebResult:
    """``[3g/2] - 1`` small zeros of ``int G(x) dx/y`` on a degree ``2g+1`` center family."""
    if g < 2:
        raise ValueError("genus must be at least 2")
    expected = (3 * g) // 2 - 1
    for retry in range(max_retries + 1):
        a, G, N = nocheb_design(g, ratio)
        m = build_center_family(CenterFamilyModel(a))
        ann = center_family_annulus(m)
        eps = 0.1 * ann.h_s
        lo = ratio ** (N + 2)
        zeros, suspected, n = _count_on_levels(m, ann, G, lo, eps)
        report = ZeroReport(zeros, sum(k for _, k in zeros), n, True, G, suspected, (0.0, eps))
        if report.count == expected:
            break
        ratio /= 2
    return NochebResult(g, a, G, ratio, expected, report, retry)


# -- non-Chebyshev annuli and scans ---------------------------------------


@dataclass
class TwoCyclesResult:
    lam: float
    mu: float
    in_omega_mu: bool
    mu_gamma_c: float
    mu_gamma: float
    a1_predictor: float
    F_slope_hc: float
    max_zeros: int
    alphas: tuple | None
    report: ZeroReport | None

    @property
    def predictor_agrees(self) -> bool:
        return (self.a1_predictor < 0) == (self.F_slope_hc > 0)

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "mu": self.mu,
            "in_omega_mu": self.in_omega_mu,
            "mu_gamma_c": self.mu_gamma_c,
            "mu_gamma": self.mu_gamma,
            "a1_predictor": self.a1_predictor,
            "F_slope_hc": self.F_slope_hc,
            "predictor_agrees": self.predictor_agrees,
            "max_zeros": self.max_zeros,
            "alphas": list(self.alphas) if self.alphas else None,
            "zeros": self.report.to_dict() if self.report else None,
        }


def F_slope_at_center(m: HamiltonianModel, a: PeriodAnnulus) -> float:
    """``dF/dh`` at ``h_c`` from a quadratic fit of ``F`` on a short geometric run."""
    d = a.width * np.geomspace(1e-6, 1e-3, 12)
    tab = eval_F(m, a, a.h_c + d)
    A = np.column_stack([np.ones_like(d), d, d * d])
    coef, *_ = np.linalg.lstsq(A, tab.F, rcond=None)
    return float(coef[1])


def twocycles_experiment(p: ParameterPoint, grid=None) -> TwoCyclesResult:
    """Two zeros of ``alpha0 I_0 + alpha1 I_1`` on the ``mu`` annulus for ``p`` in Omega_mu."""
    lam, mu = p.lam.real, p.mu.real
    inside = in_omega_mu(p)
    m = build_normal_form(p)
    a = classify(p).annulus(AnnulusKind.OMU)
    if a is None:
        raise ValueError("no mu annulus at this parameter point")
    a1 = float(m.dP(mu, 3) / (3 * m.dP(mu, 2)))
    slope = F_slope_at_center(m, a)
    table = eval_F(m, a, grid)
    mz = max_zero_count(m, a, table=table)
    alphas, report = None, None
    if mz.extrema:
        # a level strictly between F(h_c) and the interior extremum is crossed twice
        level = 0.5 * (mu + mz.extrema[0][1])
        alphas = (-level, 1.0)
        report = count_zeros(m, a, *alphas, table=table)
    return TwoCyclesResult(lam, mu, inside, float(mu_on_gamma_c(lam)), float(mu_on_gamma(lam)), a1, slope,
                           mz.max_zeros, alphas, report)


SCAN_REGIONS = ("omega_mu", "omega_e", "above_gamma", "below_gamma", "omega_1", "gamma_left")


def sample_region(region: str, rng: np.random.Generator, max_tries: int = 100000) -> ParameterPoint:
    for _ in range(max_tries):
        if region in ("omega_mu", "omega_e", "above_gamma", "below_gamma"):
            lam, mu = sorted(rng.uniform(0.02, 0.98, size=2))[::-1]
            if lam - mu < 1e-3:
                continue
            p = ParameterPoint.real(lam, mu)
            above = mu > mu_on_gamma(lam)
            ok = {
                "omega_mu": lambda: in_omega_mu(p),
                "omega_e": lambda: above and in_omega_e(p),
                "above_gamma": lambda: above,
                "below_gamma": lambda: not above,
            }[region]()
            if ok:
                return p
        elif region == "omega_1":
            z = 2 + rng.uniform(0, 0.98) * np.exp(1j * rng.uniform(0, 2 * np.pi))
            if abs(z.imag) > 1e-3:
                return ParameterPoint.complex(z)
        elif region == "gamma_left":
            a = rng.uniform(-3.0, 0.0)
            b = rng.uniform(-3.0, 3.0)
            if abs(b) > 1e-3 and b * b < 5 * a * (a - 1):
                return ParameterPoint.complex(complex(a, b))
        else:
            raise ValueError(f"unknown region {region!r}; choose from {', '.join(SCAN_REGIONS)}")
    raise RuntimeError("rejection sampling did not find a point in the region")


@dataclass
class ScanRow:
    point: ParameterPoint
    annulus: str
    max_zeros: int | None
    status: str

    def csv_row(self) -> list:
        mu = "" if not self.point.is_real else repr(self.point.mu.real)
        return [repr(self.point.lam.real), repr(self.point.lam.imag), mu, self.annulus,
                "" if self.max_zeros is None else str(self.max_zeros), self.status]


SCAN_HEADER = ["re_lambda", "im_lambda", "mu", "annulus", "max_zeros", "status"]


def _scan_one(p: ParameterPoint, grid_size: int) -> list:
    rows = []
    try:
        report = classify(p)
    except Exception as exc:  # noqa: BLE001 - logged per sample
        return [ScanRow(p, "", None, f"failed:{type(exc).__name__}")]
    m = build_normal_form(p)
    for a in report.annuli:
        try:
            mz = max_zero_count(m, a, grid=sigma_grid(a, grid_size)).max_zeros
        except Exception as exc:  # noqa: BLE001
            rows.append(ScanRow(p, a.kind.value, None, f"failed:{type(exc).__name__}"))
            continue
        if a.exceptional and mz > 1:
            status = "bound_violated"
        elif mz > 2:
            status = "conjecture_exceeded"
        else:
            status = "ok"
        rows.append(ScanRow(p, a.kind.value, mz, status))
    return rows


@dataclass
class ScanResult:
    region: str
    seed: int
    rows: list

    @property
    def summary(self) -> dict:
        by_kind = {}
        for r in self.rows:
            if r.max_zeros is not None:
                by_kind[r.annulus] = max(by_kind.get(r.annulus, 0), r.max_zeros)
        return {
            "region": self.region,
            "seed": self.seed,
            "samples": len({id(r.point) for r in self.rows}),
            "rows": len(self.rows),
            "max_by_annulus": by_kind,
            "failures": sum(r.status.startswith("failed") for r in self.rows),
            "bound_violations": sum(r.status == "bound_violated" for r in self.rows),
            "conjecture_exceeded": sum(r.status == "conjecture_exceeded" for r in self.rows),
        }


def region_scan(region: str, samples: int, seed: int = 20240601, grid_size: int = 400) -> ScanResult:
    rng = np.random.default_rng(seed)
    points = [sample_region(region, rng) for _ in range(samples)]
    per = map_ordered(lambda p: _scan_one(p, grid_size), points)
    return ScanResult(region, seed, [r for rows in per for r in rows])
