import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ricci_compare import (
    KappaProfile,
    calibrate_symmetric,
    closed_form_constant,
    cot_kappa,
    first_zero,
    m_kappa,
    solve_jacobi,
)
from ricci_compare.errors import (
    DomainExceeded,
    InvalidDimension,
    NonFiniteKappa,
    NotSymmetric,
    OutOfDomain,
)

# kappa(s) = s: sk = c1 Ai(-s) + c2 Bi(-s), evaluated with 40-digit Airy functions
AIRY_SK = {0.5: 0.49480714614681645941, 1.0: 0.91862888852788662812, 2.0: 0.89917995236265118493, 2.5: 0.26530886173018322779}
AIRY_SKP = {0.5: 0.95854991708734603267, 1.0: 0.68033692476770391821, 2.0: -0.88342788324531431197, 2.5: -1.5572873559777601985}
AIRY_DELTA = 2.6663526904069378807


@pytest.mark.parametrize("k", [-4.0, -1.0, 0.0, 1.0, 4.0])
def test_constant_kappa_matches_closed_form(k):
    s_max = 3.0 if k <= 0 else 0.99 * math.pi / math.sqrt(k)
    mf = solve_jacobi(KappaProfile.constant(k), s_max)
    s = np.linspace(0.0, s_max, 1000)
    sk, _ = closed_form_constant(k, s)
    assert np.max(np.abs(mf.sk_at(s) - sk)) <= 1e-10 * max(1.0, np.max(np.abs(sk)))
    ds = {-4.0: np.cosh(2 * s), -1.0: np.cosh(s), 0.0: np.ones_like(s), 1.0: np.cos(s), 4.0: np.cos(2 * s)}[k]
    assert np.max(np.abs(mf.sk_prime_at(s) - ds)) <= 1e-10 * max(1.0, np.max(np.abs(ds)))


def test_half_circle_values(mf_one):
    assert mf_one.sk_at(math.pi / 2) == pytest.approx(1.0, abs=1e-12)
    assert mf_one.sk_prime_at(math.pi / 2) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("k, delta", [(1.0, math.pi), (4.0, math.pi / 2), (1 / 3, math.pi * math.sqrt(3))])
def test_first_zero(k, delta):
    mf = solve_jacobi(KappaProfile.constant(k), delta * 1.05)
    assert abs(first_zero(mf) - delta) <= 1e-12


@pytest.mark.parametrize("k", [0.0, -1.0])
def test_no_zero_sentinel(k):
    mf = solve_jacobi(KappaProfile.constant(k), 50.0)
    assert math.isinf(first_zero(mf))
    assert "no zero" in mf.delta_note


def test_linear_kappa_matches_airy_oracle():
    mf = solve_jacobi(KappaProfile.piecewise_polynomial([0, 10], [[0.0, 1.0]]), 4.0)
    for s, v in AIRY_SK.items():
        assert mf.sk_at(s) == pytest.approx(v, abs=1e-12)
        assert mf.sk_prime_at(s) == pytest.approx(AIRY_SKP[s], abs=1e-12)
    assert mf.delta_kappa == pytest.approx(AIRY_DELTA, abs=1e-12)


def test_sampled_profile_agrees_with_constant():
    s = np.linspace(0, 4, 41)
    mf = solve_jacobi(KappaProfile.sampled(s, np.ones_like(s)), 4.0)
    assert mf.delta_kappa == pytest.approx(math.pi, abs=1e-12)


def test_cot_closed_forms(mf_one):
    s = np.linspace(0.05, 0.95 * math.pi, 200)
    assert np.max(np.abs(cot_kappa(mf_one, s) - 1 / np.tan(s))) < 1e-11
    mf4 = solve_jacobi(KappaProfile.constant(4.0), 1.7)
    assert cot_kappa(mf4, math.pi / 8) == pytest.approx(2.0, rel=1e-12)


def test_cot_pole_series(mf_one):
    s = np.array([1e-9, 1e-6, 5e-5])
    expected = 1 / np.tan(s)
    assert np.allclose(cot_kappa(mf_one, s), expected, rtol=1e-12)


def test_cot_near_first_zero(mf_one):
    s = math.pi * (1 - 1e-6)
    assert cot_kappa(mf_one, s) == pytest.approx(1 / math.tan(s), rel=1e-9)


def test_cot_outside_domain(mf_one):
    with pytest.raises(OutOfDomain):
        cot_kappa(mf_one, 0.0)
    with pytest.raises(OutOfDomain):
        cot_kappa(mf_one, 3.5)


def test_m_kappa(mf_one):
    assert m_kappa(mf_one, math.pi / 4, 3, 1) == pytest.approx(2.0, rel=1e-12)
    assert m_kappa(mf_one, math.pi / 4, 3, -1) == pytest.approx(4.0, rel=1e-12)
    with pytest.raises(InvalidDimension):
        m_kappa(mf_one, 1.0, 3, 1.5)


def test_closed_form_domain():
    with pytest.raises(DomainExceeded):
        closed_form_constant(1.0, 4.0)


def test_jacobi_residual(mf_one):
    assert mf_one.jacobi_residual() < 1e-10


def test_non_finite_kappa():
    with pytest.raises(NonFiniteKappa):
        solve_jacobi(KappaProfile.from_function(lambda s: np.where(s > 1, np.nan, 1.0), 3), 2.0)


def test_discontinuous_piecewise_rejected():
    with pytest.raises(ValueError):
        KappaProfile.piecewise_polynomial([0, 1, 2], [[1.0], [2.0]])


def test_symmetry_flag():
    with pytest.raises(NotSymmetric):
        KappaProfile.piecewise_polynomial([0, 5], [[0.0, 1.0]], symmetric_about=math.pi)
    KappaProfile.constant(2.0, symmetric_about=2.0)


@pytest.mark.parametrize("alpha", [0.5, 2.0, 3.0])
@pytest.mark.parametrize("k", [1.0, -1.0])
def test_scaling_property(alpha, k):
    s = np.linspace(0.05, 1.2, 50)
    base = solve_jacobi(KappaProfile.constant(k), 2.0)
    scaled = solve_jacobi(KappaProfile.constant(alpha ** 2 * k), 2.0 / alpha)
    assert np.max(np.abs(cot_kappa(base, s) - cot_kappa(scaled, s / alpha) / alpha)) < 1e-8


def test_symmetric_jacobi_identities():
    shape = KappaProfile.from_function(lambda s: 1 + 0.1 * np.sin(np.asarray(s)) ** 2, 10.0)
    prof = calibrate_symmetric(shape, math.pi)
    mf = solve_jacobi(prof, 3.3)
    d = mf.delta_kappa
    assert d == pytest.approx(math.pi, abs=1e-10)
    assert mf.sk_prime_at(d) == pytest.approx(-1.0, abs=1e-8)
    assert mf.sk_prime_at(d / 2) == pytest.approx(0.0, abs=1e-8)
    s = np.linspace(0, d, 301)
    assert np.max(np.abs(mf.sk_at(s) - mf.sk_at(d - s))) < 1e-8


def test_to_config_round_trip():
    p = KappaProfile.piecewise_polynomial([0, 1, 3], [[1.0, 0.5], [1.5, 0.0]])
    cfg = p.to_config()
    assert cfg["kind"] == "piecewise_polynomial"
    q = KappaProfile.piecewise_polynomial(cfg["breakpoints"], cfg["coefficients"], cfg.get("horizon"))
    s = np.linspace(0, 3, 17)
    assert np.array_equal(p(s), q(s))


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=-3.0, max_value=3.0))
def test_constant_kappa_property(k):
    s_max = 2.0 if k <= 0 else min(2.0, 0.9 * math.pi / math.sqrt(k))
    mf = solve_jacobi(KappaProfile.constant(k), s_max)
    s = np.linspace(0, s_max, 64)
    sk, _ = closed_form_constant(k, s)
    assert np.max(np.abs(mf.sk_at(s) - sk)) < 1e-10


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=0.2, max_value=4.0), st.floats(min_value=0.2, max_value=4.0))
def test_cot_monotone_in_kappa(k1, k2):
    lo, hi = sorted((k1, k2))
    s = np.linspace(0.05, 0.9 * math.pi / math.sqrt(hi), 40)
    a = cot_kappa(solve_jacobi(KappaProfile.constant(lo), s[-1] * 1.01), s)
    b = cot_kappa(solve_jacobi(KappaProfile.constant(hi), s[-1] * 1.01), s)
    assert np.all(b <= a + 1e-10)
