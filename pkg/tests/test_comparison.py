import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ricci_compare import (
    KappaProfile,
    ModelManifold,
    RadialProfile,
    check_ambrose,
    check_ball_growth,
    check_bg_r,
    check_bg_s,
    check_blowup,
    check_kappa0_bound,
    check_laplacian_comparison,
    check_myers,
    check_ricci_hypothesis,
    check_riccati_inequality,
    check_vm_completeness,
    check_volume_element,
    default_grid,
    find_best_constant_kappa,
    solve_jacobi,
)
from ricci_compare.comparison import (
    CONCLUSION_VIOLATED,
    CONVERGENT,
    DIVERGENT,
    HYPOTHESIS_FAILED,
    IMPLIED,
    INCONCLUSIVE,
    NOT_IMPLIED,
    PASS,
)
from ricci_compare.errors import DeltaExceeded, EmptyGrid

from conftest import SQRT_3PI_HALF


def test_default_grid(sphere):
    g = default_grid(sphere)
    assert g.size == 2000
    assert g[0] == pytest.approx(math.pi * 1e-5)
    assert g[-1] == pytest.approx(math.pi * (1 - 1e-6))
    with pytest.raises(EmptyGrid):
        default_grid(sphere, grid_size=1)


def test_ricci_hypothesis_examples(sphere, euclid, gaussian, mf_one, mf_zero, mf_third):
    rep = check_ricci_hypothesis(sphere, mf_one)
    assert rep.verdict.kind == PASS and np.max(np.abs(rep.hypothesis_margin)) < 1e-12
    rep = check_ricci_hypothesis(euclid, mf_zero)
    assert rep.verdict.kind == PASS and np.max(np.abs(rep.hypothesis_margin)) == 0
    rep = check_ricci_hypothesis(gaussian, mf_third)
    r = rep.r
    assert np.allclose(rep.hypothesis_margin, 1 + r ** 2 / 3 - np.exp(-2 * r ** 2 / 3), atol=1e-13)
    assert np.argmin(rep.hypothesis_margin) == 0


def test_ricci_hypothesis_failure_and_horizon(gaussian):
    rep = check_ricci_hypothesis(gaussian, KappaProfile.constant(0.5))
    assert rep.verdict.kind == HYPOTHESIS_FAILED
    with pytest.raises(DeltaExceeded):
        check_ricci_hypothesis(gaussian, KappaProfile.constant(0.1, horizon=1.0))


def test_laplacian_examples(sphere, euclid, gaussian, mf_one, mf_zero, mf_third):
    rep = check_laplacian_comparison(sphere, mf_one)
    assert rep.passed
    assert np.max(np.abs(rep.conclusion_margin) / np.maximum(1, np.abs(rep.series["rhs"]))) < 1e-8
    rep = check_laplacian_comparison(euclid, mf_zero)
    assert rep.passed and np.allclose(rep.conclusion_margin, 1 / rep.r, rtol=1e-10)
    rep = check_laplacian_comparison(gaussian, mf_third)
    assert rep.passed and np.all(rep.conclusion_margin > 0)
    assert rep.details["pole_limit"] == pytest.approx(2.0, abs=1e-6)


def test_laplacian_is_gated_by_hypothesis(gaussian):
    mf = solve_jacobi(KappaProfile.constant(2.0), 2.3)
    rep = check_laplacian_comparison(gaussian, mf)
    assert rep.verdict.kind == HYPOTHESIS_FAILED


def test_laplacian_delta_exceeded(euclid, mf_one):
    with pytest.raises(DeltaExceeded):
        check_laplacian_comparison(euclid, mf_one, R=5.0)


def test_riccati(sphere, euclid, gaussian, mf_one, mf_zero, mf_third):
    rep = check_riccati_inequality(sphere, mf_one)
    assert rep.passed and rep.details["max_relative_gap"] < 1e-6
    e = ModelManifold(3, 0, RadialProfile.from_selectors("r"), extent=5.0)
    rep = check_riccati_inequality(e, mf_zero)
    s = rep.s
    assert rep.passed
    assert np.allclose(rep.series["dlambda_ds"], -2 / s ** 2, rtol=1e-7)
    assert np.allclose(rep.conclusion_margin, 2 / s ** 2 - 4 / (3 * s ** 2), rtol=1e-6)
    assert check_riccati_inequality(gaussian, mf_third).passed


def test_blowup(sphere, euclid, cheng, mf_one, mf_zero, gaussian, mf_third):
    rep = check_blowup(sphere, mf_one)
    assert rep.passed
    assert np.allclose(rep.series["v_laplacian"], 2 / np.tan(rep.r), rtol=1e-6)
    assert check_blowup(euclid, mf_zero).verdict.kind == INCONCLUSIVE
    assert check_blowup(gaussian, mf_third).verdict.kind == INCONCLUSIVE
    assert check_blowup(cheng.base, cheng.mf).passed


def test_myers(sphere, gaussian, euclid, mf_one, mf_third, mf_zero):
    rep = check_myers(sphere, mf_one)
    assert rep.passed and rep.details["sup_s"] == pytest.approx(math.pi, abs=1e-12)
    rep = check_myers(gaussian, mf_third)
    assert rep.passed
    assert rep.details["sup_s"] == pytest.approx(SQRT_3PI_HALF, abs=1e-10)
    assert rep.details["delta"] == pytest.approx(math.pi * math.sqrt(3), abs=1e-10)
    assert check_myers(euclid, mf_zero).verdict.kind == INCONCLUSIVE


def test_completeness(euclid, gaussian, logweight, sphere):
    dv = check_vm_completeness(euclid)
    assert dv.classification == DIVERGENT
    assert dv.partial_integrals[-1][1] == pytest.approx(1000.0, rel=1e-12)
    dv = check_vm_completeness(gaussian)
    assert dv.classification == CONVERGENT
    assert dv.partial_integrals[-1][1] == pytest.approx(SQRT_3PI_HALF, rel=1e-12)
    dv = check_vm_completeness(logweight)
    assert dv.classification == DIVERGENT and "C/t" in dv.reason
    assert check_vm_completeness(sphere).classification == DIVERGENT
    values = [v for _, v in dv.partial_integrals]
    assert np.all(np.diff(values) >= 0)


def test_completeness_growth_exponent():
    # v = 1.2/(1+r): the integral grows like (1+R)^0.2
    mm = ModelManifold(3, 0, RadialProfile.from_selectors("r", "log", 1.2), extent=5.0)
    dv = check_vm_completeness(mm)
    assert dv.classification == DIVERGENT
    h = np.array([a for a, _ in dv.partial_integrals])
    exact = ((1 + h) ** 0.2 - 1) / 0.2
    assert np.allclose([b for _, b in dv.partial_integrals], exact, rtol=1e-9)
    last = h >= h[-1] / 10
    slope = np.polyfit(np.log(h[last]), np.log(exact[last]), 1)[0]
    assert dv.fitted_growth_exponent == pytest.approx(slope, rel=1e-6)


def test_ambrose(sphere, euclid, gaussian):
    dv, c = check_ambrose(sphere)
    assert dv.classification == DIVERGENT and c == IMPLIED
    assert dv.partial_integrals[0][1] == pytest.approx(2.0, rel=1e-12)
    dv, c = check_ambrose(euclid)
    assert dv.classification == CONVERGENT and c == NOT_IMPLIED
    dv, c = check_ambrose(gaussian)
    assert dv.classification == DIVERGENT and c == NOT_IMPLIED


def test_volume_element(sphere, euclid, gaussian, mf_one, mf_zero, mf_third):
    rep = check_volume_element(sphere, mf_one)
    assert rep.passed and np.max(np.abs(rep.series["log_ratio"])) < 1e-8
    rep = check_volume_element(euclid, mf_zero)
    assert rep.passed and np.allclose(rep.series["log_ratio"], -np.log(rep.r), rtol=1e-12)
    assert check_volume_element(gaussian, mf_third).passed


def test_bishop_gromov(sphere, euclid, gaussian, mf_one, mf_zero, mf_third):
    for fn in (check_bg_s, check_bg_r):
        rep = fn(sphere, mf_one)
        assert rep.passed and np.max(np.abs(rep.series["ratio"] - 1)) < 1e-8
    rep = check_bg_s(euclid, mf_zero)
    assert rep.passed and np.allclose(rep.series["ratio"], 4 / (3 * rep.s), rtol=1e-8)
    assert rep.details["annuli_count"] > 0
    assert check_bg_s(gaussian, mf_third).passed
    assert check_bg_r(gaussian, mf_third).passed


def test_bishop_gromov_s_grid(euclid, mf_zero):
    rep = check_bg_s(euclid, mf_zero, grid=[0.5, 1.0, 2.0, 4.0])
    assert rep.passed and np.allclose(rep.series["ratio"], 4 / (3 * np.array([0.5, 1, 2, 4])), rtol=1e-10)


def test_ball_growth(euclid, gaussian, hyperbolic):
    pairs = [(1, 2), (1, 4), (2, 3), (2, 2)]
    rep = check_ball_growth(euclid, pairs)
    r1, r2 = rep.r, rep.series["r2"]
    assert rep.passed and np.allclose(rep.conclusion_margin, (r2 / r1) ** 4 - (r2 / r1) ** 3, atol=1e-10)
    rep = check_ball_growth(gaussian, pairs)
    assert rep.passed and np.all(rep.conclusion_margin >= 0)
    assert check_ball_growth(hyperbolic, pairs).verdict.kind == HYPOTHESIS_FAILED


def test_kappa0_bound(euclid, gaussian, mf_zero):
    rep = check_kappa0_bound(euclid)
    assert rep.passed and np.allclose(rep.conclusion_margin, 1 / rep.r, rtol=1e-10)
    assert rep.details["identity_deviation"] <= 1e-10
    lap = check_laplacian_comparison(euclid, mf_zero)
    assert np.max(np.abs(rep.conclusion_margin - lap.conclusion_margin) / np.maximum(1, np.abs(lap.conclusion_margin))) < 1e-10


def test_kappa0_constant_drift():
    c = 0.5
    mm = ModelManifold(3, 0, RadialProfile.from_selectors("r", "constant", c), extent=10.0)
    rep = check_kappa0_bound(mm)
    r = rep.r
    k = 2 * c / 3
    expected = 3 / (np.exp(k * r) * (1 - np.exp(-k * r)) / k)
    assert rep.passed and np.allclose(rep.series["rhs"], expected, rtol=1e-11)


def test_best_constant_kappa(sphere, euclid, gaussian, hyperbolic, logweight):
    assert find_best_constant_kappa(sphere) == pytest.approx(1.0, abs=1e-12)
    assert find_best_constant_kappa(euclid) == 0.0
    assert find_best_constant_kappa(gaussian) == pytest.approx(1 / 3, abs=1e-6)
    assert find_best_constant_kappa(hyperbolic) == pytest.approx(-2 / 3, abs=1e-12)
    assert find_best_constant_kappa(logweight) == pytest.approx(-2 / 9, abs=1e-4)


def test_hypothesis_gating_never_claims_violation(gaussian):
    for k in (0.2, 0.34, 0.5, 1.0):
        mf = solve_jacobi(KappaProfile.constant(k), math.pi / math.sqrt(k) * 1.01)
        for fn in (check_laplacian_comparison, check_volume_element):
            rep = fn(gaussian, mf, R=min(20.0, 0.99 * mf.delta_kappa))
            if rep.verdict.kind == CONCLUSION_VIOLATED:
                assert np.all(rep.hypothesis_margin >= -1e-8)


def test_determinism(gaussian, mf_third):
    a = check_bg_r(gaussian, mf_third).to_csv()
    b = check_bg_r(gaussian, mf_third).to_csv()
    assert a == b
    assert a.startswith("# ")
    assert a.splitlines()[1].startswith("r,s,hypothesis_margin,conclusion_margin")


@settings(max_examples=15, deadline=None)
@given(st.floats(min_value=-1.0, max_value=0.33), st.floats(min_value=0.0, max_value=1.0))
def test_soundness_ordering(k1, frac):
    mm = _gauss()
    k2 = k1 - frac
    a = check_ricci_hypothesis(mm, KappaProfile.constant(k1), grid_size=200)
    b = check_ricci_hypothesis(mm, KappaProfile.constant(k2), grid_size=200)
    if a.passed:
        assert b.passed
    assert np.all(b.hypothesis_margin >= a.hypothesis_margin - 1e-12)


@settings(max_examples=15, deadline=None)
@given(st.floats(min_value=0.0, max_value=0.3), st.floats(min_value=0.0, max_value=0.3))
def test_conclusion_monotone_in_kappa(k1, k2):
    lo, hi = sorted((k1, k2))
    r = np.geomspace(1e-3, 1.0, 50)
    mm = _gauss()
    rhs = []
    for k in (lo, hi):
        mf = solve_jacobi(KappaProfile.constant(k), 2.0)
        rhs.append(check_laplacian_comparison(mm, mf, grid=r).series["rhs"])
    assert np.all(rhs[1] <= rhs[0] + 1e-10 * np.abs(rhs[0]))


_G = {}


def _gauss():
    if "g" not in _G:
        _G["g"] = ModelManifold(3, 0, RadialProfile.from_selectors("r", "linear", 1.0), extent=20.0)
    return _G["g"]
