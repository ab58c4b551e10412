"""Maximal-diameter equality models and their verification.

Given a symmetric lower bound ``kappa`` with first zero ``delta`` and a radial
potential ``phi`` (``phi'(0) = 0``), the warped product

    g = dr^2 + f(r)^2 g_{S^{n-1}},
    f(r) = exp((phi(r) + phi(0)) / (n-1)) sk(s(r)),
    s(r) = int_0^r exp(-2 phi / (n-1)),

with ``m = 1``, ``V = phi' d/dr`` and ``C_p = exp(-2 phi(0) / (n-1))`` turns
the Laplacian comparison and the curvature bound into equalities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import model_manifold as mmod
from .comparison import (
    CONCLUSION_VIOLATED,
    ComparisonReport,
    Tolerance,
    Verdict,
    PASS,
    _hypothesis,
    default_grid,
)
from .errors import DomainError, EqualityViolated, HorizonTooShort, PoleDefect
from .model_functions import check_dimensions, cot_kappa, solve_jacobi

EQUALITY_TOL = 1e-6
POLE_TOL = 1e-8
DEFAULT_EXTENT = 60.0


@dataclass(frozen=True)
class RadialPotential:
    """phi(r) with derivatives; radial smoothness at the pole needs phi'(0) = 0."""

    phi: Callable
    dphi: Callable
    d2phi: Callable
    label: str = "custom"
    params: dict = None

    def __post_init__(self):
        d0 = float(np.asarray(self.dphi(np.array([0.0])))[0])
        if abs(d0) > 1e-12:
            raise ValueError(f"a radial potential needs phi'(0) = 0, got {d0:.3g}")

    @classmethod
    def zero(cls):
        z = lambda r: np.zeros_like(np.asarray(r, dtype=float))
        return cls(z, z, z, "zero", {"kind": "zero"})

    @classmethod
    def quadratic(cls, a, b=0.0):
        """phi(r) = a r^2 + b."""
        a, b = float(a), float(b)
        return cls(
            lambda r: a * np.asarray(r, dtype=float) ** 2 + b,
            lambda r: 2 * a * np.asarray(r, dtype=float),
            lambda r: np.full_like(np.asarray(r, dtype=float), 2 * a),
            f"{a:g}*r^2+{b:g}",
            {"kind": "quadratic", "a": a, "b": b},
        )


@dataclass(frozen=True)
class MaximalModel:
    base: mmod.ModelManifold
    phi: RadialPotential
    mf: object
    r_end: float
    c_p: float

    @property
    def n(self):
        return self.base.n

    @property
    def kappa(self):
        return self.mf.kappa

    @property
    def delta(self):
        return self.mf.delta_kappa

    def s_of_r(self, r):
        return mmod.s_p_eval(self.base, r)

    def F_kappa(self, r):
        """exp(V_gamma(r)/(n-1)) sk(s_p(r))."""
        r = np.asarray(r, dtype=float)
        V = np.asarray(mmod.v_gamma(self.base, r))
        out = np.exp(V / (self.n - 1)) * self.mf._sk_interp(np.asarray(self.s_of_r(r)))
        return out if out.ndim else float(out)

    def perturbed(self, eps=1e-3):
        """Negative control: f replaced by f (1 + eps r^2)."""
        p = lambda r: 1 + eps * np.asarray(r, dtype=float) ** 2
        dp = lambda r: 2 * eps * np.asarray(r, dtype=float)
        d2p = lambda r: np.full_like(np.asarray(r, dtype=float), 2 * eps)
        prof = replace(self.base.profile.perturbed(p, dp, d2p), closed=True, check_pole=False)
        base = mmod.ModelManifold(self.n, 1, prof, self.c_p, self.r_end, self.base.table_size, self.base.geodesic)
        return replace(self, base=base)

    def table(self, points=1001):
        r = np.linspace(0.0, self.r_end, points)
        p = self.base.profile
        return {"r": r, "f": p.f(r), "v": p.v(r), "s": np.asarray(self.s_of_r(r))}

    def to_csv(self, stream, points=1001):
        t = self.table(points)
        stream.write("# ricci-compare maximal model v1\n")
        stream.write("r,f,v,s\n")
        for row in zip(t["r"], t["f"], t["v"], t["s"]):
            stream.write(",".join("%.17g" % x for x in row) + "\n")


def _solve_until_zero(kappa):
    if kappa.symmetric_about is not None:
        guess = kappa.symmetric_about * 1.01
    elif kappa.is_constant and kappa.params["value"] > 0:
        guess = 1.01 * math.pi / math.sqrt(kappa.params["value"])
    else:
        guess = 100.0
    s_max = min(kappa.horizon, guess)
    mf = solve_jacobi(kappa, s_max)
    if not math.isfinite(mf.delta_kappa):
        raise DomainError("kappa has no first zero within its horizon")
    return mf


def build_cheng_model(n, kappa, phi, c_p=None, extent=DEFAULT_EXTENT, table_size=4096):
    """Warped-product equality model; ``c_p`` overrides the pole-consistent constant."""
    if int(n) != n or n < 2:
        raise ValueError("n must be an integer >= 2")
    n = int(n)
    check_dimensions(n, 1)
    mf = _solve_until_zero(kappa)
    delta = mf.delta_kappa
    kappa.check_symmetry(delta)
    phi0 = float(np.asarray(phi.phi(np.array([0.0])))[0])
    if c_p is None:
        c_p = math.exp(-2.0 * phi0 / (n - 1))
    long = mmod.GeodesicQuantities(phi.dphi, n, 1, c_p, extent, table_size)
    if long.s_sup <= delta:
        raise HorizonTooShort(f"s(r) reaches only {long.s_sup:.6g} <= delta_kappa = {delta:.6g} within r <= {extent}")
    r_end = float(long.invert(delta, rtol=1e-14))
    gq = mmod.GeodesicQuantities(phi.dphi, n, 1, c_p, r_end, table_size)
    sk, skp = mf._sk_interp, mf._skp_interp
    nm1 = n - 1

    def parts(r):
        r = np.asarray(r, dtype=float)
        V = np.asarray(gq.V_gamma(r))
        s = np.minimum(np.asarray(gq.s_p(r)), delta)
        E = np.exp((V + 2.0 * phi0) / nm1)
        du = phi.dphi(r) / nm1
        d2u = phi.d2phi(r) / nm1
        ds = c_p * np.exp(-2.0 * V / nm1)
        return E, sk(s), skp(s), np.asarray(kappa(s)), du, d2u, ds

    def f(r):
        E, a, _, _, _, _, _ = parts(r)
        return E * a

    def df(r):
        E, a, b, _, du, _, ds = parts(r)
        return E * (du * a + ds * b)

    def d2f(r):
        E, a, b, k, du, d2u, ds = parts(r)
        d2s = -2.0 * du * ds
        return E * (du * (du * a + ds * b) + d2u * a + du * ds * b + d2s * b - ds * ds * k * a)

    profile = mmod.RadialProfile(
        f, df, d2f, phi.dphi, phi.d2phi, r_end, True, phi0, "cheng-model", {"phi": phi.params}, check_pole=False
    )
    base = mmod.ModelManifold(n, 1, profile, c_p, r_end, table_size, gq)
    return MaximalModel(base, phi, mf, r_end, c_p)


def _relative(a, b):
    return np.abs(a - b) / np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))


def verify_equality_case(model, grid_size=2000, strict=True, tol=EQUALITY_TOL):
    """Check (a) Laplacian equality, (b) curvature equality and (c) f = F_kappa / C_p.

    With ``strict`` the first failing equality raises :class:`EqualityViolated`;
    otherwise it is recorded in the returned report's verdict.
    """
    mm, mf = model.base, model.mf
    n1 = mm.n - 1
    r = default_grid(mm, None, grid_size)
    s = np.asarray(mmod.s_p_eval(mm, r))
    V = np.asarray(mmod.v_gamma(mm, r))
    lap = np.asarray(mmod.v_laplacian_r(mm, r))
    lap_model = n1 * np.asarray(cot_kappa(mf, s)) * np.exp(-2.0 * V / n1) * mm.c_p
    ric = np.asarray(mmod.modified_ricci_radial(mm, r))
    ric_model = n1 * np.asarray(mf.kappa(s)) * np.exp(-4.0 * V / n1) * mm.c_p ** 2
    f = mm.profile.f(r)
    F = np.asarray(model.F_kappa(r)) / mm.c_p
    devs = {"a": _relative(lap, lap_model), "b": _relative(ric, ric_model), "c": _relative(f, F)}
    worst = np.maximum.reduce(list(devs.values()))
    hyp, _, _ = _hypothesis(mm, mf.kappa, r, Tolerance(tol, tol))
    verdict = Verdict(PASS)
    details = {f"max_deviation_{k}": float(v.max()) for k, v in devs.items()}
    for which, d in devs.items():
        bad = np.flatnonzero(d > tol)
        if bad.size:
            k = int(bad[0])
            if strict:
                raise EqualityViolated(which, float(r[k]), float(d[k]))
            verdict = Verdict(CONCLUSION_VIOLATED, float(r[k]), -float(d[k]), f"equality ({which})")
            break
    series = {f"deviation_{k}": v for k, v in devs.items()}
    return ComparisonReport("equality_case", r, s, hyp, -worst, verdict, Tolerance(tol, 0.0), series, details)


def verify_pole_smoothness(model, tol=POLE_TOL):
    """f(0) = 0 and f'(0) = 1 by the analytic derivative and a one-sided difference."""
    p = model.base.profile
    h = 1e-5
    f0, f1, f2 = p.f(np.array([0.0, h, 2 * h]))
    df0 = float(p.df(np.array([0.0]))[0])
    one_sided = (-3 * f0 + 4 * f1 - f2) / (2 * h)
    diag = {"f0": float(f0), "df0_analytic": df0, "df0_one_sided": float(one_sided)}
    if abs(f0) > tol or abs(df0 - 1) > tol or abs(one_sided - 1) > tol:
        raise PoleDefect(f"pole is not smooth: f(0) = {f0:.3g}, f'(0) = {df0:.12g} (one-sided {one_sided:.12g})")
    return diag
