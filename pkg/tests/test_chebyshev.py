import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from abelint.bifurcation import classify
from abelint.chebyshev import (
    SCAN_HEADER,
    GridTooCoarse,
    _sign_changes,
    count_zeros,
    cyclicity_predicted_zeros,
    eval_F,
    max_zero_count,
    nocheb_design,
    region_scan,
    sigma_grid,
    twocycles_experiment,
)
from abelint.hamiltonian import ParameterPoint, build_normal_form


@pytest.fixture(scope="module")
def o1_table():
    p = ParameterPoint.real(0.5, 0.25)
    m = build_normal_form(p)
    a = classify(p).annulus("O1")
    return m, a, eval_F(m, a, sigma_grid(a, 300))


def test_sigma_grid_inside_and_clustered():
    a = classify(ParameterPoint.real(0.5, 0.25)).annulus("O1")
    g = sigma_grid(a, 500)
    assert np.all(np.diff(g) > 0) and g[0] > a.h_c and g[-1] < a.h_s
    assert (g[1] - g[0]) < 1e-6 * a.width and (g[-1] - g[-2]) < 1e-6 * a.width


def test_sigma_grid_rejects_rounding_level_width():
    from abelint.bifurcation import AnnulusKind, PeriodAnnulus, Terminator

    a = PeriodAnnulus(AnnulusKind.O1, 1.0, (1.0, 1.0 + 1e-14), Terminator.SADDLE_LOOP)
    with pytest.raises(GridTooCoarse):
        sigma_grid(a, 10)


def test_sign_changes_skip_unreliable_samples():
    v = np.array([1.0, 1e-20, -1.0, -2.0, 3.0])
    err = np.array([0.1, 0.1, 0.1, 0.1, 0.1])
    assert _sign_changes(v, err) == [(0, 2), (3, 4)]


@given(st.floats(-3, 3), st.floats(0.1, 10), st.sampled_from([-1.0, 1.0]))
def test_zero_report_scaling_invariance(o1_table, a0, c, sign):
    m, a, table = o1_table
    r1 = count_zeros(m, a, a0, 1.0, table=table, refine=False)
    r2 = count_zeros(m, a, c * sign * a0, c * sign, table=table, refine=False)
    # identical up to the rounding of the scaled combination
    assert r1.count == r2.count and [k for _, k in r1.zeros] == [k for _, k in r2.zeros]
    np.testing.assert_allclose([z for z, _ in r1.zeros], [z for z, _ in r2.zeros], rtol=0, atol=1e-12 * a.width)
    np.testing.assert_allclose(r1.suspected_double, r2.suspected_double, rtol=0, atol=1e-12 * a.width)


@given(st.floats(-1.5, -0.2))
def test_count_matches_F_level_crossings(o1_table, a0):
    m, a, table = o1_table
    rep = count_zeros(m, a, a0, 1.0, table=table, refine=False)
    crossings = _sign_changes(table.F + a0, table.errF)
    assert rep.count == len(crossings)
    for z, k in rep.zeros:
        assert a.h_c < z < a.h_s and k >= 1


def test_refined_zero_is_a_root(o1_table):
    m, a, table = o1_table
    level = 0.5 * (table.F.min() + table.F.max())
    rep = count_zeros(m, a, -level, 1.0, table=table)
    assert rep.count == 1
    from abelint.quadrature import abelian_integrals

    (h, _), = rep.zeros
    i0, i1 = abelian_integrals(m, a, h, (0, 1))
    assert abs(i1.value / i0.value - level) < 1e-9


def test_count_zeros_rejects_zero_direction(o1_table):
    m, a, table = o1_table
    with pytest.raises(ValueError):
        count_zeros(m, a, 0.0, 0.0, table=table)


WIDE_BAND = [
    ((0.5, 0.25), None), ((0.3, 0.2), None), ((0.6, 0.26), None), ((0.7, 0.45), None),
    (None, -1 + 0.5j), (None, 2 + 0.3j), (None, 0.5 + 0.5j),
]


@pytest.mark.parametrize("real, lam", WIDE_BAND)
def test_max_zero_count_equals_direction_supremum(real, lam):
    p = ParameterPoint.real(*real) if real else ParameterPoint.complex(lam)
    m = build_normal_form(p)
    for a in classify(p).annuli:
        rep = max_zero_count(m, a, grid=sigma_grid(a, 400), directions=720)
        assert rep.max_zeros == rep.direction_max
        if a.exceptional:
            assert rep.max_zeros == 1


def test_exceptional_scan_never_exceeds_one():
    res = region_scan("above_gamma", 4, seed=7, grid_size=300)
    s = res.summary
    assert s["bound_violations"] == 0 and s["failures"] == 0
    assert s["max_by_annulus"]["O1"] == 1
    assert all(len(r.csv_row()) == len(SCAN_HEADER) for r in res.rows)


def test_scan_is_deterministic():
    a = [r.csv_row() for r in region_scan("gamma_left", 2, seed=3, grid_size=200).rows]
    b = [r.csv_row() for r in region_scan("gamma_left", 2, seed=3, grid_size=200).rows]
    assert a == b


def test_scan_unknown_region():
    with pytest.raises(ValueError):
        region_scan("nowhere", 1)


def test_cyclicity_predictor_roots():
    z = cyclicity_predicted_zeros(0.05, 0.0, -1.0, 1e-4)
    assert len(z) == 2 and 0 < z[0] < z[1] < 0.1


@pytest.mark.parametrize("g", [2, 3])
def test_nocheb_design_alternates(g):
    a, G, N = nocheb_design(g, 0.1)
    assert len(a) == 2 * g - 1 and a[-1] != 0
    assert all(a[j] == 0 for j in range(1, len(a), 2))  # only odd powers x**(2j+1) are set
    assert N == g // 2 + g - 1


def test_twocycles_predictor():
    res = twocycles_experiment(ParameterPoint.real(0.6, 0.26), grid=None)
    assert res.in_omega_mu and res.predictor_agrees
    assert res.max_zeros == 2 and res.report.count == 2
