import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abelint.bifurcation import classify
from abelint.hamiltonian import ParameterPoint, build_normal_form
from abelint.quadrature import (
    Method,
    OutsideSigmaError,
    abelian_integral,
    abelian_integrals,
    complex_cycle_integral,
    continued_integral,
    cycle_integrals,
    cycle_pair,
    delta_at_critical,
    delta_curve,
    determination_walk,
    integrals_at,
    oval_endpoints,
    trace_R_branch,
    winding,
)
from abelint.quadrature.contour import track_sqrt
from abelint.quadrature.rcurve import _QR


def harmonic(lam, mu):
    return 2 * math.pi / math.sqrt((1 - lam) * (1 - mu))


@st.composite
def real_instance(draw):
    a = draw(st.floats(0.05, 0.95))
    b = draw(st.floats(0.05, 0.95))
    lam, mu = max(a, b), min(a, b)
    if lam - mu < 0.02:
        lam, mu = min(lam + 0.02, 0.97), max(mu - 0.02, 0.03)
    p = ParameterPoint.real(lam, mu)
    rep = classify(p)
    ann = rep.annuli[draw(st.integers(0, len(rep.annuli) - 1))]
    s = draw(st.floats(0.01, 0.99))
    return p, ann, ann.h_c + s * ann.width


def test_harmonic_limit_frozen(exceptional_real):
    _, m, a = exceptional_real
    v = abelian_integral(m, a, a.h_c + 1e-8 * a.width, 0)
    assert v.method is Method.REAL_OVAL
    assert v.value.imag == 0
    assert v.value.real == pytest.approx(harmonic(0.5, 0.25), rel=1e-6)


@settings(max_examples=30)
@given(real_instance(), st.integers(0, 3))
def test_real_oval_matches_contour(inst, k):
    p, a, h = inst
    m = build_normal_form(p)
    r = abelian_integral(m, a, h, k)
    c = cycle_integrals(m, h, oval_endpoints(m, a, h), (k,))
    diff = abs(r.value - c.values[k])
    assert diff <= 2 * (r.error + c.errors[k]) + 1e-13 * abs(r.value)


def test_error_estimate_within_tolerance(exceptional_real):
    _, m, a = exceptional_real
    for s in (0.1, 0.5, 0.9):
        for smp in abelian_integrals(m, a, a.h_c + s * a.width, (0, 1, 2)):
            assert smp.converged and smp.error <= 1e-10 * abs(smp.value)


def test_node_doubling_converges_geometrically(exceptional_real):
    # away from the ends the smooth factor makes Gauss-Chebyshev spectrally accurate
    _, m, a = exceptional_real
    h = a.h_c + 0.5 * a.width
    exact = abelian_integral(m, a, h, 1, tol=1e-14).value
    errs = [abs(abelian_integral(m, a, h, 1, tol=1e-300, max_nodes=n).value - exact) for n in (16, 32)]
    assert errs[1] <= errs[0] / 10 or errs[1] < 1e-14 * abs(exact)


def test_outside_sigma_rejected(exceptional_real):
    _, m, a = exceptional_real
    with pytest.raises(OutsideSigmaError):
        abelian_integral(m, a, a.h_s + 1e-3, 0)
    with pytest.raises(OutsideSigmaError):
        integrals_at(m, a, a.h_s)


def test_sample_record_keys(exceptional_real):
    _, m, a = exceptional_real
    rec = abelian_integral(m, a, a.h_c + 0.3 * a.width, 0).to_record()
    assert list(rec) == ["h_re", "h_im", "k", "val_re", "val_im", "err", "method"]


@pytest.mark.parametrize("lam, mu", [(0.5, 0.25), (0.8, 0.1)])
def test_r_branch_residual_and_monotone(lam, mu):
    p = ParameterPoint.real(lam, mu)
    m = build_normal_form(p)
    a = classify(p).annulus("O1")
    qr = _QR(m)
    for depth in (1e-3, 1.0, 10.0):
        br = trace_R_branch(m, a, a.h_c - depth * a.width)
        assert np.all(np.diff(br.y) > 0)
        assert np.max(np.abs(qr.R(br.x, br.y))) <= 1e-10


@pytest.mark.parametrize("lam", [0.5 + 0.0j, -1 + 0.5j, 2 + 0.3j])
def test_continuation_matches_contour(lam):
    p = ParameterPoint.real(0.5, 0.25) if lam.imag == 0 else ParameterPoint.complex(lam)
    m = build_normal_form(p)
    a = classify(p).annulus("O1")
    for depth in (1e-4, 0.1, 10.0):
        h = a.h_c - depth * a.width
        r = continued_integral(m, a, h)
        c = cycle_integrals(m, h, cycle_pair(m, a, h), (0,))
        assert r.method.value == "RCurve"
        assert abs(r.value - c.values[0]) <= 2 * (r.error + c.errors[0]) + 1e-12 * abs(r.value)


def test_continuation_is_analytic_across_hc(exceptional_real):
    # I_0 extends smoothly through h_c: values on both sides fit one low-degree polynomial
    _, m, a = exceptional_real
    d = a.width * np.array([-2e-3, -1e-3, 1e-3, 2e-3])
    v = [continued_integral(m, a, a.h_c + x).value.real if x < 0 else abelian_integral(m, a, a.h_c + x, 0).value.real
         for x in d]
    fit = np.polyfit(d, v, 2)
    assert abs(np.polyval(fit, 0.0) - harmonic(0.5, 0.25)) < 1e-6 * harmonic(0.5, 0.25)


@given(st.floats(-1.0, 0.4), st.integers(0, 2))
def test_conjugation(h, k):
    m = build_normal_form(ParameterPoint.real(0.5, 0.25))
    from abelint.hamiltonian import solve_level

    if min(abs(h - v) for v in (0.0, m.P(0.25), m.P(0.5), m.P(1.0))) < 1e-3:
        return  # double roots at critical levels
    roots = solve_level(m, h)
    pair = [z for z in roots if z.imag > 1e-6][:1]
    if not pair:
        return
    z = pair[0]
    others = [w for w in roots if abs(w - z) > 1e-9 and abs(w - z.conjugate()) > 1e-9]
    partner = min(others, key=lambda w: abs(w - z))
    a = complex_cycle_integral(m, h, (z, partner), k)
    b = complex_cycle_integral(m, h, (z.conjugate(), partner.conjugate()), k)
    assert abs(a - b.conjugate()) <= 1e-9 * max(1.0, abs(a))


def test_track_sqrt_continuity():
    t = np.linspace(0, 4 * np.pi, 801)
    y, step = track_sqrt(np.exp(1j * t))
    np.testing.assert_allclose(y, np.exp(0.5j * t), atol=1e-12)
    assert step <= np.pi / 64


def test_delta_curve_properties(exceptional_real):
    _, m, a = exceptional_real
    hs = a.h_s + a.width * np.geomspace(0.01, 100, 8)
    samples = delta_curve(m, a, hs)
    assert min(abs(s.delta) for s in samples) > 1.0
    assert all(s.im_F < 0 for s in samples)


def test_determinations_are_conjugate(exceptional_real):
    _, m, a = exceptional_real
    hs = [a.h_s + 0.5 * a.width, a.h_s + 5 * a.width]
    up = determination_walk(m, a, hs, +1)
    down = determination_walk(m, a, hs, -1)
    for u, d in zip(up, down):
        for k in (0, 1):
            assert abs(u.values[k] - np.conj(d.values[k])) < 1e-9 * abs(u.values[k])


def test_delta_requires_exceptional():
    p = ParameterPoint.real(0.5, 0.25)
    m = build_normal_form(p)
    a = classify(p).annulus("OMu")
    with pytest.raises(ValueError):
        delta_curve(m, a, [a.h_s + 0.1])


def test_delta_at_critical_frozen(exceptional_real):
    _, m, a = exceptional_real
    dc = delta_at_critical(m, a)
    assert dc.h0 == 0.0 and dc.x0 == 0.0
    assert dc.rel_diff < 1e-10
    # both pipelines (contour and residue) give this value
    assert abs(dc.contour - (-134.67863185319808j)) < 1e-8


def test_winding_small_r_rejected(exceptional_real):
    _, m, a = exceptional_real
    with pytest.raises(ValueError):
        winding(m, a, 2 * a.width)
    with pytest.raises(ValueError):
        winding(m, a, 1e-3, which="I2")


@pytest.mark.parametrize(
    "lam, mu, h",
    [
        # trace steps that land on the branch end up to rounding
        (0.7709771301450654, 0.20164915694478394, -0.003903008772506574),
        (2.2626734552705097 + 0.6597362698741159j, None, -6.25817458261306),
        (2.4146784373676784 + 0.9647849009731639j, None, -7.629080247810728),
    ],
)
def test_r_branch_end_on_sample(lam, mu, h):
    p = ParameterPoint.real(lam, mu) if mu is not None else ParameterPoint.complex(lam)
    m = build_normal_form(p)
    a = classify(p).annulus("O1")
    br = trace_R_branch(m, a, h)
    assert np.all(np.diff(br.y) > 0)
    r = continued_integral(m, a, h)
    c = cycle_integrals(m, h, cycle_pair(m, a, h), (0,))
    assert r.value.real > 0
    assert abs(r.value - c.values[0]) <= 1e-9 * abs(r.value)
