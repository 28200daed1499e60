"""Bifurcation diagram of the quintic normal form and its period annuli."""

from __future__ import annotations

import csv
import enum
import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize
from scipy.interpolate import PchipInterpolator

from .hamiltonian import (
    HamiltonianModel,
    ParameterPoint,
    build_normal_form,
    critical_values_closed_form,
    solve_level,
)

CURVE_TOL = 1e-10
VALUE_TOL = 1e-14


class AnnulusKind(str, enum.Enum):
    O1 = "O1"
    OMU = "OMu"
    OE = "OE"
    # families of the general center model (center at the origin)
    OC = "OC"


class Terminator(str, enum.Enum):
    SADDLE_LOOP = "SaddleLoop"
    HETEROCLINIC_LOOP = "HeteroclinicLoop"
    CUSPIDAL_LOOP = "CuspidalLoop"
    EIGHT_LOOP = "EightLoopBoundary"


class Region(str, enum.Enum):
    REAL_ABOVE_GAMMA = "RealAboveGamma"
    REAL_BELOW_GAMMA = "RealBelowGamma"
    REAL_DEGENERATE = "RealDegenerate"
    COMPLEX_LEFT = "ComplexLeftBranch"
    COMPLEX_RIGHT = "ComplexRightBranch"
    COMPLEX_BETWEEN = "ComplexBetweenBranches"
    ON_CURVE = "OnCurve"


class DegenerateDynkinError(ValueError):
    """Dynkin data requested for coincident critical values."""

    degenerate = True


class BracketError(RuntimeError):
    pass


@dataclass(frozen=True)
class PeriodAnnulus:
    """A maximal family of ovals on ``sigma = (h_c, h_s)``.

    ``saddles`` lists the x-coordinates of the singular points on the
    boundary polycycle at ``h_s``; ``minima`` the centers inside the ovals.
    """

    kind: AnnulusKind
    center: float | None
    sigma: tuple
    terminator: Terminator
    exceptional: bool = False
    saddles: tuple = ()
    minima: tuple = ()

    @property
    def h_c(self) -> float:
        return self.sigma[0]

    @property
    def h_s(self) -> float:
        return self.sigma[1]

    @property
    def width(self) -> float:
        return self.sigma[1] - self.sigma[0]

    @property
    def x_s(self) -> float | None:
        """Saddle (or cusp) closing the loop; for heteroclinic loops the nonzero one."""
        if not self.saddles:
            return None
        if len(self.saddles) == 1:
            return self.saddles[0]
        nonzero = [s for s in self.saddles if s != 0.0]
        return nonzero[0] if nonzero else self.saddles[0]

    @property
    def x_inside(self) -> float:
        """A point strictly inside every oval of the family."""
        if self.center is not None:
            return self.center
        return float(np.mean(self.minima))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "center": self.center,
            "h_c": self.sigma[0],
            "h_s": self.sigma[1],
            "terminator": self.terminator.value,
            "exceptional": self.exceptional,
            "saddles": list(self.saddles),
        }


@dataclass
class RegionReport:
    region: Region
    detail: str | None
    annuli: list
    critical_ordering: str
    dynkin: np.ndarray | None
    point: ParameterPoint = field(repr=False, default=None)

    def annulus(self, kind) -> PeriodAnnulus:
        kind = AnnulusKind(kind)
        for a in self.annuli:
            if a.kind is kind:
                return a
        raise KeyError(f"no annulus of kind {kind.value} at this parameter point")

    def to_dict(self) -> dict:
        return {
            "region": self.region.value,
            "detail": self.detail,
            "annuli": [a.to_dict() for a in self.annuli],
            "critical_ordering": self.critical_ordering,
            "dynkin": None if self.dynkin is None else self.dynkin.astype(int).tolist(),
        }


# ---------------------------------------------------------------- curves

def mu_on_gamma(lam):
    """The curve h_lambda = h_0 inside the triangle."""
    return (3 * lam**2 - 5 * lam) / (5 * (lam - 2))


def lam_on_gamma_c(mu):
    return (3 * mu**2 - 2 * mu) / (2 * mu - 1)


def mu_on_gamma_c(lam):
    """Inverse of :func:`lam_on_gamma_c` on the branch inside the triangle."""
    disc = (2 + 2 * lam) ** 2 - 12 * lam
    return ((2 + 2 * lam) - math.sqrt(disc)) / 6


def hyperbola_value(lam: complex) -> float:
    """``(Im lam)^2 - 5 Re lam (Re lam - 1)``; negative inside either branch."""
    a, b = lam.real, lam.imag
    return b * b - 5 * a * (a - 1)


def hyperbola_distance(lam: complex) -> float:
    a, b = lam.real, lam.imag
    g = hyperbola_value(lam)
    grad = math.hypot(10 * a - 5, 2 * b)
    return abs(g) / grad if grad > 0 else abs(g)


def complex_branch(lam: complex) -> Region:
    if hyperbola_value(lam) < 0:
        return Region.COMPLEX_LEFT if lam.real < 0.5 else Region.COMPLEX_RIGHT
    return Region.COMPLEX_BETWEEN


def inside_hyperbola(p: ParameterPoint) -> bool:
    return (not p.is_real) and hyperbola_value(p.lam) < 0


# ------------------------------------------------------------ annuli sweep

def _critical_types(m: HamiltonianModel):
    """Distinct real critical points of P with type 'min', 'max' or 'flat'."""
    pts = m.real_critical_points
    distinct = []
    for x in pts:
        if not distinct or abs(x - distinct[-1]) > 1e-9:
            distinct.append(float(x))
    out = []
    for i, x in enumerate(distinct):
        lo = distinct[i - 1] if i > 0 else x - 1.0
        hi = distinct[i + 1] if i + 1 < len(distinct) else x + 1.0
        left = np.real(m.dP(0.5 * (lo + x)))
        right = np.real(m.dP(0.5 * (x + hi)))
        if left < 0 < right:
            kind = "min"
        elif left > 0 > right:
            kind = "max"
        else:
            kind = "flat"
        out.append((x, kind, float(np.real(m.P(x)))))
    return out


def _components(m: HamiltonianModel, h: float, crit):
    """Bounded components of ``{P < h}`` as (left, right, interior critical set)."""
    roots = solve_level(m, h)
    real = np.sort(np.real(roots[np.abs(roots.imag) <= 1e-9 * np.maximum(1, np.abs(roots))]))
    comps = []
    for lo, hi in zip(real[:-1], real[1:]):
        mid = 0.5 * (lo + hi)
        if np.real(m.P(mid)) < h:
            inside = tuple(c[0] for c in crit if lo < c[0] < hi)
            comps.append((lo, hi, inside))
    return comps


def annuli_from_profile(m: HamiltonianModel) -> list:
    """Period annuli from a sweep of the sublevel sets of P.

    Families are chained across critical levels while the set of critical
    points enclosed by the oval is unchanged.
    """
    crit = _critical_types(m)
    kinds = {c[0]: c[1] for c in crit}
    values = sorted({c[2] for c in crit})
    levels = []
    for v in values:
        if not levels or v - levels[-1] > VALUE_TOL * max(1.0, abs(v)):
            levels.append(v)
    span = max(1.0, max(abs(v) for v in levels)) if levels else 1.0
    mids = [0.5 * (a + b) for a, b in zip(levels[:-1], levels[1:])]
    mids.append(levels[-1] + 0.5 * span) if levels else None
    gaps = [_components(m, h, crit) for h in mids]
    families = []
    open_chains = {}
    for g, comps in enumerate(gaps):
        new_chains = {}
        for lo, hi, inside in comps:
            chain = open_chains.pop(inside, None) or {"start": levels[g], "inside": inside}
            chain["extent"] = (lo, hi)
            new_chains[inside] = chain
        for chain in open_chains.values():
            chain["end"] = levels[g]
            chain["gap_after"] = g
            families.append(chain)
        open_chains = new_chains
    for chain in open_chains.values():
        chain["end"] = math.inf
        chain["gap_after"] = None
        families.append(chain)

    annuli = []
    for chain in families:
        inside = chain["inside"]
        minima = tuple(x for x in inside if kinds[x] == "min")
        if not minima or not math.isfinite(chain["end"]):
            continue
        end = chain["end"]
        lo, hi = chain["extent"]
        tol = 1e-12 * max(1.0, abs(end))
        left = [c for c in crit if c[0] <= lo]
        right = [c for c in crit if c[0] >= hi]
        touching = []
        if left and abs(left[-1][2] - end) <= tol:
            touching.append(left[-1])
        if right and abs(right[0][2] - end) <= tol:
            touching.append(right[0])
        parent = None
        for plo, phi, ins in gaps[chain["gap_after"]]:
            if set(inside) <= set(ins):
                parent = ins
        absorbed = [x for x in (parent or ()) if x not in inside]
        saddles = tuple(c[0] for c in touching)
        if any(c[1] == "flat" for c in touching):
            term = Terminator.CUSPIDAL_LOOP
        elif len(touching) >= 2:
            term = Terminator.HETEROCLINIC_LOOP
        elif parent is not None and any(kinds[x] == "min" for x in absorbed):
            term = Terminator.EIGHT_LOOP
        else:
            term = Terminator.SADDLE_LOOP
        center = minima[0] if len(inside) == 1 else None
        annuli.append(
            PeriodAnnulus(
                kind=AnnulusKind.OC,
                center=center,
                sigma=(chain["start"], end),
                terminator=term,
                saddles=saddles,
                minima=minima,
            )
        )
    annuli.sort(key=lambda a: (a.sigma[0], a.sigma[1]))
    return annuli


def _label_normal_form(a: PeriodAnnulus, p: ParameterPoint) -> PeriodAnnulus:
    if a.center is not None and abs(a.center - 1.0) < 1e-9:
        kind = AnnulusKind.O1
    elif a.center is not None and p.is_real and abs(a.center - p.mu.real) < 1e-9:
        kind = AnnulusKind.OMU
    else:
        kind = AnnulusKind.OE
    return PeriodAnnulus(kind, a.center, a.sigma, a.terminator, False, a.saddles, a.minima)


# --------------------------------------------------------------- classify

def _ordering_tag(cv, real: bool) -> str:
    if real:
        names = [("h1", cv.h1), ("hMu", cv.hMu), ("hLambda", cv.hLambda), ("h0", cv.h0)]
        names.sort(key=lambda t: t[1].real if isinstance(t[1], complex) else t[1])
        parts = [names[0][0]]
        for (n0, v0), (n1, v1) in zip(names[:-1], names[1:]):
            parts.append("=" if abs(v1 - v0) <= VALUE_TOL * max(1, abs(v1)) else "<")
            parts.append(n1)
        return "".join(parts)
    h1, h0 = cv.h1.real, 0.0
    first = "h1<h0" if h1 < h0 else "h0<h1"
    return first + ";hLambda,hMu complex"


def _distinct_values(cv) -> bool:
    vals = [complex(v) for v in (cv.h0, cv.hMu, cv.hLambda, cv.h1)]
    for i in range(4):
        for j in range(i + 1, 4):
            if abs(vals[i] - vals[j]) <= 1e-13:
                return False
    return True


def classify(p: ParameterPoint) -> RegionReport:
    m = build_normal_form(p)
    cv = m.critical_values
    if p.is_real:
        lam, mu = p.lam.real, p.mu.real
        boundary = []
        if mu <= CURVE_TOL:
            boundary.append("mu=0")
        if lam - mu <= CURVE_TOL:
            boundary.append("mu=lambda")
        if 1 - lam <= CURVE_TOL:
            boundary.append("lambda=1")
        on_gamma = abs(mu - mu_on_gamma(lam)) <= CURVE_TOL
        if boundary:
            region, detail = Region.REAL_DEGENERATE, ",".join(boundary)
        elif on_gamma:
            region, detail = Region.ON_CURVE, "gamma"
        elif cv.hLambda < cv.h0:
            region, detail = Region.REAL_ABOVE_GAMMA, None
        else:
            region, detail = Region.REAL_BELOW_GAMMA, None

        if region in (Region.REAL_ABOVE_GAMMA, Region.REAL_BELOW_GAMMA):
            above = region is Region.REAL_ABOVE_GAMMA
            term = Terminator.EIGHT_LOOP if above else Terminator.SADDLE_LOOP
            annuli = [
                PeriodAnnulus(
                    AnnulusKind.O1, 1.0, (cv.h1, cv.hLambda), term,
                    saddles=(lam,), minima=(1.0,),
                ),
                PeriodAnnulus(
                    AnnulusKind.OMU, mu, (cv.hMu, min(cv.h0, cv.hLambda)), term,
                    saddles=((lam,) if above else (0.0,)), minima=(mu,),
                ),
            ]
            if above:
                annuli.append(
                    PeriodAnnulus(
                        AnnulusKind.OE, None, (cv.hLambda, cv.h0), Terminator.SADDLE_LOOP,
                        saddles=(0.0,), minima=(mu, 1.0),
                    )
                )
        else:
            annuli = [_label_normal_form(a, p) for a in annuli_from_profile(m)]
    else:
        lam = p.lam
        if hyperbola_distance(lam) <= CURVE_TOL:
            region, detail = Region.ON_CURVE, "Gamma"
        else:
            region, detail = complex_branch(lam), None
        annuli = [
            PeriodAnnulus(
                AnnulusKind.O1, 1.0, (cv.h1.real, 0.0), Terminator.SADDLE_LOOP,
                saddles=(0.0,), minima=(1.0,),
            )
        ]

    distinct = _distinct_values(cv)
    marked = []
    for a in annuli:
        flag = _exceptional_rule(p, a, region, distinct)
        marked.append(PeriodAnnulus(a.kind, a.center, a.sigma, a.terminator, flag, a.saddles, a.minima))
    try:
        dyn = dynkin(_ordering_tag(cv, p.is_real), region) if distinct else None
    except DegenerateDynkinError:
        dyn = None
    return RegionReport(
        region=region,
        detail=detail,
        annuli=marked,
        critical_ordering=_ordering_tag(cv, p.is_real),
        dynkin=dyn,
        point=p,
    )


def _exceptional_rule(p: ParameterPoint, a: PeriodAnnulus, region: Region, distinct: bool) -> bool:
    if a.kind is not AnnulusKind.O1 or not distinct:
        return False
    if p.is_real:
        return region in (Region.REAL_ABOVE_GAMMA, Region.REAL_BELOW_GAMMA)
    return region is Region.COMPLEX_LEFT


def exceptional(p: ParameterPoint, a: PeriodAnnulus) -> bool:
    """Whether the family ``a`` continues analytically around its loop value."""
    report = classify(p)
    distinct = _distinct_values(build_normal_form(p).critical_values)
    return _exceptional_rule(p, a, report.region, distinct)


# ----------------------------------------------------------------- dynkin

DYNKIN_ORDER = ("1", "lambda", "mu", "0")

_DYNKIN_EDGES = {
    "real": [("1", "lambda"), ("lambda", "mu"), ("mu", "0")],
    Region.COMPLEX_LEFT: [("1", "0"), ("0", "lambda"), ("0", "mu"), ("lambda", "mu")],
    Region.COMPLEX_RIGHT: [("0", "1"), ("1", "lambda"), ("1", "mu"), ("lambda", "mu")],
    Region.COMPLEX_BETWEEN: [("0", "lambda"), ("lambda", "1"), ("mu", "1"), ("0", "mu"), ("0", "1")],
}


def dynkin(critical_ordering: str, region: Region) -> np.ndarray:
    """Adjacency of the vanishing cycles, vertex order ``DYNKIN_ORDER``."""
    if "=" in critical_ordering:
        raise DegenerateDynkinError(f"coincident critical values: {critical_ordering}")
    region = Region(region)
    if region in (Region.REAL_ABOVE_GAMMA, Region.REAL_BELOW_GAMMA):
        edges = _DYNKIN_EDGES["real"]
    elif region in _DYNKIN_EDGES:
        edges = _DYNKIN_EDGES[region]
    else:
        raise DegenerateDynkinError(f"no Dynkin data on a degenerate region ({region.value})")
    idx = {name: i for i, name in enumerate(DYNKIN_ORDER)}
    mat = np.zeros((4, 4), dtype=int)
    for u, v in edges:
        mat[idx[u], idx[v]] = mat[idx[v], idx[u]] = 1
    return mat


# ---------------------------------------------------------------- gamma_s

def _eight_loop_roots(lam: float, mu: float):
    """Roots x1 < x2 <= x3 of (P(x) - h_lambda)/(x - lambda)^2."""
    cv = critical_values_closed_form(lam, mu)
    coeffs = np.array([
        0.0, 0.0, -lam * mu / 2, (lam + mu + lam * mu) / 3, -(1 + lam + mu) / 4, 0.2,
    ])
    coeffs[0] -= cv.hLambda
    quot, _ = np.polynomial.polynomial.polydiv(coeffs, [lam * lam, -2 * lam, 1.0])
    roots = np.sort(np.real(np.polynomial.polynomial.polyroots(quot * 5)))
    return roots


def _inv_sqrt_piece(a: float, b: float, c: float, lo: float, hi: float, sing_at_lo: bool) -> float:
    """Integral of 1/sqrt((x-a)(x-b)(c-x)) over [lo, hi] with a sqrt singularity at one end."""
    if hi <= lo:
        return 0.0
    width = hi - lo

    def f(s):
        if sing_at_lo:
            x = lo + width * s * s
            w = (x - a) * (c - x) if b == lo else (x - a) * (x - b) * (c - x) / (x - lo)
        else:
            x = hi - width * s * s
            w = (x - a) * (x - b) if c == hi else (x - a) * (x - b) * (c - x) / (hi - x)
        return 2.0 * math.sqrt(width) / math.sqrt(w)

    # near the bracket ends the roundoff warning is expected; brentq only needs the sign
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(f, 0.0, 1.0, limit=200, epsabs=1e-13, epsrel=1e-12)
    return val


def gamma_s_function(lam: float, mu: float) -> float:
    """Continuous part of ``I_1 - lam*I_0`` at the eight-loop level h_lambda."""
    x1, x2, x3 = _eight_loop_roots(lam, mu)
    right = _inv_sqrt_piece(x1, x2, x3, lam, x3, sing_at_lo=False)
    left = _inv_sqrt_piece(x1, x2, x3, x2, lam, sing_at_lo=True)
    return math.sqrt(10.0) * (right - left)


def gamma_s_mu(lam: float, rel_margin: float = 1e-9) -> float:
    """mu on gamma_s at fixed lambda, by bisection between gamma and the diagonal."""
    lo = mu_on_gamma(lam)
    hi = lam
    pad = rel_margin * (hi - lo)
    a, b = lo + pad, hi - pad
    fa, fb = gamma_s_function(lam, a), gamma_s_function(lam, b)
    if not (fa < 0 < fb):
        raise BracketError(f"gamma_s bracket failed at lambda={lam}: phi={fa:.3e}, {fb:.3e}")
    return optimize.brentq(lambda m: gamma_s_function(lam, m), a, b, xtol=1e-14, rtol=1e-13)


class GammaS:
    """Tabulated gamma_s with monotone (PCHIP) interpolation in lambda."""

    def __init__(self, n: int = 41):
        lams = np.linspace(0.0, 1.0, n)[1:-1]
        mus = [gamma_s_mu(float(l)) for l in lams]
        self.lams = np.concatenate([[0.0], lams, [1.0]])
        self.mus = np.concatenate([[0.0], mus, [1.0]])
        self._interp = PchipInterpolator(self.lams, self.mus)

    def __call__(self, lam):
        return self._interp(lam)


# ----------------------------------------------------------- curve samples

@dataclass(frozen=True)
class CurveSample:
    curve: str
    lam: complex
    mu: complex | None

    def row(self) -> dict:
        return {
            "curve": self.curve,
            "re_lambda": self.lam.real + 0.0,
            "im_lambda": self.lam.imag + 0.0,
            "mu": "" if self.mu is None else self.mu.real + 0.0,
        }


CURVES = ("gamma", "Gamma", "gamma_c_real", "gamma_c_complex", "gamma_s")


def curve_samples(curve: str, n: int) -> list:
    if n < 2:
        raise ValueError("need at least two samples")
    if curve == "gamma":
        lams = np.linspace(0.0, 1.0, n)
        return [CurveSample(curve, complex(l), complex(mu_on_gamma(l))) for l in lams]
    if curve == "gamma_c_real":
        mus = np.linspace(0.0, 1.0 / 3.0, n)
        return [CurveSample(curve, complex(lam_on_gamma_c(m)), complex(m)) for m in mus]
    if curve == "gamma_c_complex":
        th = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        return [CurveSample(curve, complex(2 + np.exp(1j * t)), None) for t in th]
    if curve == "Gamma":
        out = []
        half = max(1, n // 2)
        for a in np.linspace(-2.0, 0.0, half, endpoint=False):
            out.append(CurveSample(curve, complex(a, math.sqrt(5 * a * (a - 1))), None))
        for a in np.linspace(1.0, 3.0, n - half + 1)[1:]:
            out.append(CurveSample(curve, complex(a, math.sqrt(5 * a * (a - 1))), None))
        return out[:n]
    if curve == "gamma_s":
        lams = np.linspace(0.0, 1.0, n + 2)[1:-1]
        return [CurveSample(curve, complex(l), complex(gamma_s_mu(float(l)))) for l in lams]
    raise ValueError(f"unknown curve {curve!r}")


def curves_csv(samples: list) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["curve", "re_lambda", "im_lambda", "mu"], lineterminator="\n")
    w.writeheader()
    for s in samples:
        w.writerow(s.row())
    return buf.getvalue()


# ------------------------------------------------------------ subregions

def in_omega_mu(p: ParameterPoint) -> bool:
    """Real points between gamma_c and gamma (O_mu not Chebyshev)."""
    if not p.is_real:
        return False
    lam, mu = p.lam.real, p.mu.real
    if not (0 < mu < lam < 1):
        return False
    return mu_on_gamma_c(lam) < mu < mu_on_gamma(lam)


def in_omega_e(p: ParameterPoint) -> bool:
    """Real points between gamma_s and the diagonal (O_e not Chebyshev)."""
    if not p.is_real:
        return False
    lam, mu = p.lam.real, p.mu.real
    if not (0 < mu < lam < 1) or mu <= mu_on_gamma(lam):
        return False
    return gamma_s_function(lam, mu) > 0


def in_omega_1(p: ParameterPoint) -> bool:
    return (not p.is_real) and abs(p.lam - 2) < 1


def center_family_annulus(m: HamiltonianModel) -> PeriodAnnulus:
    """The family of ovals around the center at the origin of a center model."""
    for a in annuli_from_profile(m):
        if a.center is not None and abs(a.center) < 1e-12:
            return a
    raise ValueError("no period annulus around the origin")
