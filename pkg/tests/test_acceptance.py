"""Acceptance criteria, one test each.

Every test prints a single ``[ACn] PASS|FAIL ...`` line, also under output
capture, and then asserts.  Run ``pytest tests/test_acceptance.py -v`` or
``python3 tests/test_acceptance.py``.
"""

import math
import sys
import time

import numpy as np
import pytest

from abelint.asymptotics import F_limits, c_const, infinity_exponent_fit
from abelint.bifurcation import (
    center_family_annulus,
    classify,
    hyperbola_value,
    in_omega_mu,
    mu_on_gamma,
    mu_on_gamma_c,
)
from abelint.chebyshev import (
    count_zeros,
    cyclicity_experiment,
    eval_F,
    max_zero_count,
    nocheb_experiment,
    sigma_grid,
    twocycles_experiment,
)
from abelint.hamiltonian import CenterFamilyModel, ParameterPoint, build_center_family, build_normal_form
from abelint.quadrature import (
    abelian_integral,
    abelian_integrals,
    continued_integral,
    cycle_integrals,
    cycle_pairs,
    delta_at_critical,
    delta_curve,
    determination_walk,
    winding,
)

SEED = 20240601


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail, elapsed, budget):
        ok = ok and elapsed < budget
        line = f"[AC{n:>2}] {'PASS' if ok else 'FAIL'}  {detail}  ({elapsed:.1f}s of {budget:.0f}s)"
        with capsys.disabled():
            print("\n" + line)
        return ok

    return emit


def _o1(p):
    return build_normal_form(p), classify(p).annulus("O1")


def test_ac01_center_constants(report):
    t0 = time.perf_counter()
    m = build_center_family(CenterFamilyModel((0.1, 0.05, -0.2)))
    a = center_family_annulus(m)
    ts = [1e-4, 5e-5, 2.5e-5]
    worst, parts = 0.0, []
    for k in (0, 1, 2):
        f = [abelian_integrals(m, a, t, (2 * k,), tol=1e-14)[0].value.real / t**k for t in ts]
        # halving t: kill the O(t) and then the O(t**2) term
        r1 = [2 * f[1] - f[0], 2 * f[2] - f[1]]
        limit = (4 * r1[1] - r1[0]) / 3
        rel = abs(limit - c_const(k)) / c_const(k)
        worst = max(worst, rel)
        parts.append(f"c_{k} rel {rel:.1e}")
    ok = report(1, worst < 1e-5, "center constants " + ", ".join(parts), time.perf_counter() - t0, 10)
    assert ok


def test_ac02_harmonic_limit(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(20):
        while True:
            lam, mu = np.sort(rng.uniform(0, 1, 2))[::-1]
            if lam - mu > 1e-3 and abs(mu - mu_on_gamma(lam)) > 1e-6:
                break
        m, a = _o1(ParameterPoint.real(lam, mu))
        v = abelian_integral(m, a, a.h_c + 1e-8 * a.width, 0).value.real
        exact = 2 * math.pi / math.sqrt((1 - lam) * (1 - mu))
        worst = max(worst, abs(v - exact) / exact)
    ok = report(2, worst < 1e-4, f"harmonic limit, 20 points, worst rel {worst:.1e}", time.perf_counter() - t0, 30)
    assert ok


def _positivity_points():
    rng = np.random.default_rng(SEED + 3)
    pts = []
    while len(pts) < 10:
        lam, mu = np.sort(rng.uniform(0.02, 0.98, 2))[::-1]
        if lam - mu > 0.02 and abs(mu - mu_on_gamma(lam)) > 1e-3:
            pts.append(ParameterPoint.real(lam, mu))
    while len(pts) < 15:
        z = complex(rng.uniform(-3, 4), rng.uniform(0.05, 3))
        if hyperbola_value(z) < -0.05:
            pts.append(ParameterPoint.complex(z))
    return pts


def test_ac03_positivity(report):
    t0 = time.perf_counter()
    min_val, worst_agree, n_checked = math.inf, 0.0, 0
    for p in _positivity_points():
        m, a = _o1(p)
        grid = np.linspace(a.h_c - 10 * a.width, a.h_s, 202)[1:-1]
        pairs = cycle_pairs(m, a, grid)
        for h, pair in zip(grid, pairs):
            if a.h_c < h:
                v = abelian_integral(m, a, h, 0).value.real
            else:
                r = continued_integral(m, a, h)
                c = cycle_integrals(m, h, pair, (0,)).values[0]
                worst_agree = max(worst_agree, abs(r.value - c) / abs(r.value))
                v = r.value.real
                n_checked += 1
            min_val = min(min_val, v)
    ok = min_val > 0 and worst_agree < 1e-8
    ok = report(3, ok, f"I0 > 0 on 15x200 grids (min {min_val:.3g}); RCurve vs contour worst rel "
                       f"{worst_agree:.1e} over {n_checked} levels", time.perf_counter() - t0, 120)
    assert ok


@pytest.mark.parametrize("lam", [0.5 + 0.0j, -1 + 0.5j], ids=["real", "complex"])
def test_ac04_exceptional_chebyshev(report, lam):
    t0 = time.perf_counter()
    p = ParameterPoint.real(0.5, 0.25) if lam.imag == 0 else ParameterPoint.complex(lam)
    m, a = _o1(p)
    assert a.exceptional
    table = eval_F(m, a, sigma_grid(a, 2000))
    rep = max_zero_count(m, a, table=table, directions=360)
    hs = a.h_s + a.width * np.geomspace(0.01, 100, 50)
    samples = delta_curve(m, a, hs)
    dmin = min(abs(s.delta) for s in samples)
    signs = {int(np.sign(s.im_F)) for s in samples}
    ok = rep.max_zeros == 1 and rep.direction_max == 1 and dmin > 0 and len(signs) == 1 and 0 not in signs
    detail = (f"lambda={lam}: max zeros {rep.max_zeros}, 360-direction max {rep.direction_max}, "
              f"min|Delta| {dmin:.3g}, Im F sign {signs}")
    ok = report(4, ok, detail, time.perf_counter() - t0, 300)
    assert ok


def test_ac05_cyclicity(report):
    t0 = time.perf_counter()
    res = cyclicity_experiment(a2=0.0, a3=-1.0, a1=0.05, alpha0=1e-4, alpha1=1.0)
    z = res.report
    ok = z.count == 2 and all(k == 1 for _, k in z.zeros) and not z.suspected_double
    ok = ok and all(0 < h < res.epsilon for h, _ in z.zeros)
    detail = f"zeros {[f'{h:.6g}' for h, _ in z.zeros]} in (0, {res.epsilon:.3g}), predicted " \
             f"{[f'{h:.6g}' for h in res.predicted]}"
    ok = report(5, ok, detail, time.perf_counter() - t0, 20)
    assert ok


def test_ac06_nocheb(report):
    t0 = time.perf_counter()
    counts, ok = {}, True
    for g in (2, 3):
        res = nocheb_experiment(g)
        counts[g] = (res.report.count, res.expected, res.retries)
        ok = ok and res.report.count == res.expected == (3 * g) // 2 - 1 and res.retries <= 6
    detail = ", ".join(f"g={g}: {c} zeros (expected {e}, {r} retries)" for g, (c, e, r) in counts.items())
    ok = report(6, ok, detail, time.perf_counter() - t0, 60)
    assert ok


def test_ac07_infinity_exponents(report):
    t0 = time.perf_counter()
    m, a = _o1(ParameterPoint.real(0.5, 0.25))
    hs = np.geomspace(1e2, 1e5, 31)
    pts = determination_walk(m, a, hs, +1)
    f0 = infinity_exponent_fit(hs, [pt.values[0] for pt in pts])
    f1 = infinity_exponent_fit(hs, [pt.values[1] for pt in pts])
    ok = abs(f0.exponent + 0.3) <= 0.005 and abs(f1.exponent + 0.1) <= 0.005
    detail = (f"I0 exponent {f0.exponent:.4f} (raw slope {f0.raw_slope:.4f}), "
              f"I1 exponent {f1.exponent:.4f} (raw slope {f1.raw_slope:.4f})")
    ok = report(7, ok, detail, time.perf_counter() - t0, 60)
    assert ok


def test_ac08_endpoint_models(report):
    t0 = time.perf_counter()
    m, a = _o1(ParameterPoint.real(0.8, 0.1))
    loop = F_limits(m, a)
    rel = abs(loop.at_hs - a.x_s) / abs(a.x_s)
    mc, ac = _o1(ParameterPoint.real(0.4, 0.4))
    cusp = F_limits(mc, ac)
    p_free = cusp.diagnostics["fit_I0"]["free_exponent"]
    ok = (loop.model_hs == "LogLoop" and rel < 0.01 and cusp.model_hs == "CuspPower"
          and abs(p_free + 1 / 6) <= 0.01)
    detail = (f"saddle loop at (0.8, 0.1): {loop.model_hs}, F(h_s) {loop.at_hs:.6f} vs x_s {a.x_s} "
              f"(rel {rel:.1e}); lambda=mu=0.4: {cusp.model_hs}, exponent {p_free:.5f}")
    ok = report(8, ok, detail, time.perf_counter() - t0, 60)
    assert ok


def test_ac09_two_cycles(report):
    t0 = time.perf_counter()
    lam, mu = 0.6, 0.26
    between = mu_on_gamma_c(lam) < mu < mu_on_gamma(lam)
    p = ParameterPoint.real(lam, mu)
    res = twocycles_experiment(p)
    m = build_normal_form(p)
    a = classify(p).annulus("OMu")
    recount = count_zeros(m, a, *res.alphas) if res.alphas else None
    ok = (between and in_omega_mu(p) and res.max_zeros >= 2 and recount is not None and recount.count == 2
          and res.predictor_agrees and res.a1_predictor < 0 and res.F_slope_hc > 0)
    detail = (f"mu_gamma_c {mu_on_gamma_c(lam):.4f} < {mu} < mu_gamma {mu_on_gamma(lam):.4f}; "
              f"alpha {res.alphas} gives {recount.count if recount else None} zeros; "
              f"a1 {res.a1_predictor:.4f}, F'(h_mu) {res.F_slope_hc:.3f}")
    ok = report(9, ok, detail, time.perf_counter() - t0, 120)
    assert ok


def test_ac10_winding(report):
    t0 = time.perf_counter()
    m, a = _o1(ParameterPoint.real(0.5, 0.25))
    res = winding(m, a, 1e-4, "I0")
    big = res.pieces["big_circle"]
    rel = abs(-big - 3 * math.pi / 5) / (3 * math.pi / 5)
    ok = rel < 0.05 and res.total < 2 * math.pi
    detail = f"big circle {big / math.pi:+.4f} pi (target -0.6 pi, rel {rel:.1e}), total {res.total / math.pi:+.4f} pi"
    ok = report(10, ok, detail, time.perf_counter() - t0, 120)
    assert ok


def test_ac11_degenerate_determinant(report):
    t0 = time.perf_counter()
    m, a = _o1(ParameterPoint.real(0.5, 0.25))
    dc = delta_at_critical(m, a)
    ok = dc.h0 > a.h_s and dc.rel_diff < 1e-6 and abs(dc.contour) > 0 and abs(dc.residue) > 0
    detail = (f"h0 {dc.h0} > h_s {a.h_s:.3g}: contour {dc.contour:.10g}, residue {dc.residue:.10g}, "
              f"rel diff {dc.rel_diff:.1e}")
    ok = report(11, ok, detail, time.perf_counter() - t0, 30)
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
