"""Grid-based verification of the comparison inequalities on model manifolds.

Every ``check_*`` function evaluates a hypothesis margin (LHS - RHS of the
curvature assumption, required to be >= 0) and a conclusion margin
(RHS - LHS of the asserted inequality, expected >= 0) on a radial grid and
condenses them into a :class:`Verdict`.  A conclusion is never reported as
violated where its own hypothesis fails.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Optional, Sequence

import numpy as np

from . import model_manifold as mmod
from ._quadrature import CumulativeIntegral, table_nodes
from .errors import DeltaExceeded, EmptyGrid, OutOfDomain
from .model_functions import KappaProfile, ModelFunctions, cot_kappa

PASS = "Pass"
HYPOTHESIS_FAILED = "HypothesisFailed"
CONCLUSION_VIOLATED = "ConclusionViolated"
INCONCLUSIVE = "Inconclusive"

DIVERGENT = "Divergent"
CONVERGENT = "Convergent"

IMPLIED = "Implied"
NOT_IMPLIED = "NotImplied"

DEFAULT_GRID_SIZE = 2000
DEFAULT_HORIZONS = tuple(float(h) for h in np.geomspace(1.0, 1000.0, 13))
#: smallest epsilon offsets from delta_kappa probed by check_blowup
BLOWUP_EPS = (1e-2, 1e-3, 1e-4)
#: lambda * eps must fall below this fraction of -(n - m)
BLOWUP_FACTOR = 0.5
GROWTH_EXPONENT = 0.05
CAUCHY_TOL = 1e-8
CSV_VERSION = "ricci-compare report v1"


@dataclass(frozen=True)
class Tolerance:
    """Inequality slack ``atol + rtol * max(|lhs|, |rhs|)``."""

    atol: float = 1e-8
    rtol: float = 1e-8

    def __post_init__(self):
        if not (self.atol > 0 and self.rtol >= 0):
            raise ValueError("tolerances must be positive")

    def slack(self, lhs, rhs):
        return self.atol + self.rtol * np.maximum(np.abs(lhs), np.abs(rhs))


DEFAULT_TOL = Tolerance()
FD_TOL = Tolerance(1e-6, 1e-6)


@dataclass(frozen=True)
class Verdict:
    kind: str
    r: Optional[float] = None
    margin: Optional[float] = None
    reason: str = ""

    @property
    def passed(self):
        return self.kind == PASS

    def __str__(self):
        if self.kind == HYPOTHESIS_FAILED:
            return f"{self.kind}(r={self.r:.17g})"
        if self.kind == CONCLUSION_VIOLATED:
            return f"{self.kind}(r={self.r:.17g}, margin={self.margin:.17g})"
        if self.kind == INCONCLUSIVE:
            return f"{self.kind}({self.reason})"
        return self.kind


@dataclass
class ComparisonReport:
    """Per-point margins and the verdict of one check.

    ``series`` holds extra per-point columns (e.g. ratios) and ``details``
    scalar diagnostics; both are serialized.
    """

    check_name: str
    r: np.ndarray
    s: np.ndarray
    hypothesis_margin: np.ndarray
    conclusion_margin: np.ndarray
    verdict: Verdict
    tolerance: Tolerance = DEFAULT_TOL
    series: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.verdict.passed

    def _extreme(self, values):
        v = np.asarray(values, dtype=float)
        if v.size == 0 or np.all(np.isnan(v)):
            return math.nan, math.nan
        k = int(np.nanargmin(v))
        return float(v[k]), float(self.r[k])

    def summary(self):
        hm, hr = self._extreme(self.hypothesis_margin)
        cm, cr = self._extreme(self.conclusion_margin)
        out = {
            "check": self.check_name,
            "verdict": str(self.verdict),
            "min_hypothesis_margin": hm,
            "r_min_hypothesis": hr,
            "min_conclusion_margin": cm,
            "r_min_conclusion": cr,
        }
        out.update(self.details)
        return out

    def to_csv(self, stream=None):
        """Write the per-point table; returns the text when ``stream`` is None."""
        buf = io.StringIO() if stream is None else stream
        cols = ["r", "s", "hypothesis_margin", "conclusion_margin", *self.series]
        buf.write(f"# {CSV_VERSION}; check={self.check_name}; verdict={self.verdict}\n")
        buf.write(",".join(cols) + "\n")
        data = [self.r, self.s, self.hypothesis_margin, self.conclusion_margin, *self.series.values()]
        data = [np.broadcast_to(np.asarray(c, dtype=float), np.shape(self.r)) for c in data]
        for row in zip(*data):
            buf.write(",".join("%.17g" % x for x in row) + "\n")
        if stream is None:
            return buf.getvalue()
        return None


@dataclass
class DivergenceVerdict:
    classification: str
    partial_integrals: list
    fitted_growth_exponent: float
    reason: str = ""

    def __str__(self):
        return f"{self.classification}({self.reason})" if self.reason else self.classification


# -- helpers -----------------------------------------------------------------
def _kappa_of(mf):
    if isinstance(mf, KappaProfile):
        return mf
    return mf.kappa


def default_grid(mm, R=None, grid_size=DEFAULT_GRID_SIZE):
    """Geometric grid on [R 1e-5, R (1 - 1e-6)] avoiding both singular ends."""
    R = mm.extent if R is None else float(R)
    if grid_size < 2:
        raise EmptyGrid("grid needs at least two points")
    if not 0 < R <= mm.extent * (1 + 1e-15):
        raise OutOfDomain(f"R must lie in (0, {mm.extent}]")
    return np.geomspace(R * 1e-5, R * (1 - 1e-6), int(grid_size))


def _resolve_grid(mm, R, grid_size, grid=None):
    if grid is not None:
        g = np.asarray(grid, dtype=float)
        if g.size == 0:
            raise EmptyGrid("empty grid")
        if np.any(np.diff(g) <= 0):
            raise ValueError("grid must be strictly increasing")
        return g
    return default_grid(mm, R, grid_size)


def _first(mask):
    idx = np.flatnonzero(mask)
    return int(idx[0]) if idx.size else None


def _judge(r, hyp, hyp_slack, concl, concl_slack, extra=None):
    """Verdict from margins; ``extra`` is an optional (r, margin) violation."""
    with np.errstate(invalid="ignore"):
        bad_h = np.asarray(hyp) < -np.asarray(hyp_slack)
    k = _first(bad_h)
    if k is not None:
        return Verdict(HYPOTHESIS_FAILED, float(np.asarray(r)[k]), float(np.asarray(hyp)[k]))
    with np.errstate(invalid="ignore"):
        bad_c = np.asarray(concl) < -np.asarray(concl_slack)
    k = _first(bad_c)
    if k is not None:
        return Verdict(CONCLUSION_VIOLATED, float(np.asarray(r)[k]), float(np.asarray(concl)[k]))
    if extra is not None:
        return Verdict(CONCLUSION_VIOLATED, float(extra[0]), float(extra[1]))
    return Verdict(PASS)


def _hypothesis(mm, kappa, r, tol):
    """(margin, slack, s) of Ric_{m,n}(d_r, d_r) >= (n-m) kappa(s) e^{-4 phi/(n-m)} C_p^2."""
    s = np.asarray(mmod.s_p_eval(mm, r))
    if np.any(s > kappa.horizon * (1 + 1e-12)):
        raise DeltaExceeded(f"s_p reaches {s.max():.6g} beyond the kappa horizon {kappa.horizon}")
    ric = np.asarray(mmod.modified_ricci_radial(mm, r))
    V = np.asarray(mmod.v_gamma(mm, r))
    rhs = mm.nm * np.asarray(kappa(s)) * np.exp(-4.0 * V / mm.nm) * mm.c_p ** 2
    return ric - rhs, tol.slack(ric, rhs), s


def _nonnegative_ricci(mm, r, tol):
    ric = np.asarray(mmod.modified_ricci_radial(mm, r))
    return ric, tol.slack(ric, 0.0)


def _require_below_delta(mf, s_top):
    top = min(mf.delta_kappa, mf.s_max)
    if s_top > top * (1 + 1e-12):
        raise DeltaExceeded(f"s_p reaches {s_top:.6g} beyond min(delta_kappa, s_max) = {top:.6g}")


def _running_margin(ratio):
    """min_{i<j} ratio_i - ratio_j (0 at the first point)."""
    ratio = np.asarray(ratio, dtype=float)
    prev = np.minimum.accumulate(ratio)
    out = np.zeros_like(ratio)
    out[1:] = prev[:-1] - ratio[1:]
    return out


# -- curvature hypothesis and Laplacian comparison ---------------------------
def check_ricci_hypothesis(mm, mf, R=None, grid_size=DEFAULT_GRID_SIZE, tol=DEFAULT_TOL, grid=None):
    r = _resolve_grid(mm, R, grid_size, grid)
    hyp, slack, s = _hypothesis(mm, _kappa_of(mf), r, tol)
    nan = np.full_like(r, np.nan)
    verdict = _judge(r, hyp, slack, nan, nan)
    return ComparisonReport("ricci_hypothesis", r, s, hyp, nan, verdict, tol)


def check_laplacian_comparison(mm, mf, R=None, grid_size=DEFAULT_GRID_SIZE, tol=DEFAULT_TOL, grid=None):
    """Delta_V r <= (n-m) cot_kappa(s_p) e^{-2 phi_V/(n-m)} C_p, plus the pole limit."""
    r = _resolve_grid(mm, R, grid_size, grid)
    hyp, hslack, s = _hypothesis(mm, mf.kappa, r, tol)
    _require_below_delta(mf, float(s[-1]))
    lhs = np.asarray(mmod.v_laplacian_r(mm, r))
    V = np.asarray(mmod.v_gamma(mm, r))
    rhs = mm.nm * np.asarray(cot_kappa(mf, s)) * np.exp(-2.0 * V / mm.nm) * mm.c_p
    concl = rhs - lhs
    # r * Delta_V r tends to n - 1, the right side times r to n - m
    pole = float(r[0] * lhs[0])
    extra = None
    if pole > mm.nm + 1e-6 * mm.nm:
        extra = (float(r[0]), mm.nm - pole)
    verdict = _judge(r, hyp, hslack, concl, tol.slack(lhs, rhs), extra)
    details = {"pole_limit": pole, "pole_bound": mm.nm}
    return ComparisonReport("laplacian", r, s, hyp, concl, verdict, tol, {"lhs": lhs, "rhs": rhs}, details)


def _lam(mm, r):
    V = np.asarray(mmod.v_gamma(mm, r))
    return np.exp(2.0 * V / mm.nm) / mm.c_p * np.asarray(mmod.v_laplacian_r(mm, r))


def check_riccati_inequality(mm, mf, R=None, grid_size=DEFAULT_GRID_SIZE, tol=FD_TOL, grid=None):
    """d lambda/ds <= -lambda^2/(n-m) - C_p^{-2} e^{4 V/(n-m)} Ric_{m,n} by central differences."""
    r = _resolve_grid(mm, R, grid_size, grid)
    hyp, hslack, s = _hypothesis(mm, mf.kappa, r, DEFAULT_TOL)
    end = min(mm.r_max, mm.extent)
    h = 1e-4 * np.minimum(r, end - r)
    dlam_dr = (_lam(mm, r + h) - _lam(mm, r - h)) / (2.0 * h)
    gq = mm.geodesic
    dlam_ds = dlam_dr / np.asarray(gq.ds_dr(r))
    lam = _lam(mm, r)
    V = np.asarray(mmod.v_gamma(mm, r))
    ric = np.asarray(mmod.modified_ricci_radial(mm, r))
    rhs = -lam ** 2 / mm.nm - np.exp(4.0 * V / mm.nm) / mm.c_p ** 2 * ric
    concl = rhs - dlam_ds
    verdict = _judge(r, hyp, hslack, concl, tol.slack(rhs, dlam_ds))
    rel = np.abs(concl) / np.maximum(np.abs(rhs), 1.0)
    details = {"max_relative_gap": float(rel.max())}
    return ComparisonReport("riccati", r, s, hyp, concl, verdict, tol, {"lambda": lam, "dlambda_ds": dlam_ds}, details)


def check_blowup(mm, mf, tol=DEFAULT_TOL, grid_size=DEFAULT_GRID_SIZE):
    """lambda(s) ~ -(n-m)/(delta - s) as s_p approaches delta_kappa."""
    delta = mf.delta_kappa
    empty = np.array([])
    if not math.isfinite(delta):
        v = Verdict(INCONCLUSIVE, reason="delta_kappa is infinite")
        return ComparisonReport("blowup", empty, empty, empty, empty, v, tol)
    gq = mm.geodesic
    eps = np.array(BLOWUP_EPS)
    if gq.s_sup < delta - 1e-6:
        v = Verdict(INCONCLUSIVE, reason=f"domain ends at s = {gq.s_sup:.6g} before delta_kappa = {delta:.6g}")
        return ComparisonReport("blowup", empty, empty, empty, empty, v, tol, details={"delta": delta})
    # whole-domain hypothesis first
    rg = default_grid(mm, None, grid_size)
    rg = rg[np.asarray(gq.s_p(rg)) < delta]
    hyp_all, hs_all, _ = _hypothesis(mm, mf.kappa, rg, tol)
    s = delta - eps
    r = np.asarray(gq.invert(s))
    lap = np.asarray(mmod.v_laplacian_r(mm, r))
    lam = _lam(mm, r)
    concl = -BLOWUP_FACTOR * mm.nm - lam * eps
    hyp, hslack, _ = _hypothesis(mm, mf.kappa, r, tol)
    h_verdict = _judge(rg, hyp_all, hs_all, np.zeros_like(rg), np.ones_like(rg))
    extra = None
    if not np.all(np.diff(lap) < 0):
        extra = (float(r[-1]), float(np.diff(lap).max()))
    inside = np.asarray(gq.s_p(rg))
    if h_verdict.kind == HYPOTHESIS_FAILED:
        verdict = h_verdict
    else:
        verdict = _judge(r, hyp, hslack, concl, np.full_like(concl, tol.atol), extra)
    details = {"delta": delta, "max_s_on_domain": float(inside.max())}
    return ComparisonReport("blowup", r, s, hyp, concl, verdict, tol, {"eps": eps, "v_laplacian": lap, "lambda": lam}, details)


def check_myers(mm, mf, tol=DEFAULT_TOL, grid_size=DEFAULT_GRID_SIZE):
    """sup s_p over the working domain does not exceed delta_kappa."""
    delta = mf.delta_kappa
    r = default_grid(mm, None, grid_size)
    hyp, hslack, s = _hypothesis(mm, mf.kappa, r, tol)
    sup_s = mm.geodesic.s_sup
    details = {"sup_s": sup_s, "delta": delta}
    if not math.isfinite(delta):
        v = Verdict(INCONCLUSIVE, reason="delta_kappa is infinite")
        return ComparisonReport("myers", r, s, hyp, np.full_like(r, np.inf), v, tol, details=details)
    concl = delta - s
    extra = None
    if sup_s > delta + tol.slack(sup_s, delta):
        extra = (mm.extent, delta - sup_s)
    verdict = _judge(r, hyp, hslack, concl, tol.slack(s, delta), extra)
    return ComparisonReport("myers", r, s, hyp, concl, verdict, tol, details=details)


# -- completeness and Ambrose ------------------------------------------------
def _fold(table, period, R):
    """Cumulative integral of an integrand of the triangle-wave radius r(t) on a closed model."""
    k = np.floor(R / period)
    rem = R - k * period
    full = table(period)
    odd = (k % 2) == 1
    part = np.where(odd, full - np.asarray(table(period - rem)), np.asarray(table(rem)))
    return k * full + part


def _horizon_setup(mm, horizons):
    h = np.asarray(sorted(float(x) for x in horizons))
    if h.size < 2 or np.any(h <= 0):
        raise ValueError("need at least two positive horizons")
    closed = mm.profile.closed
    if not closed and h[-1] > mm.r_max:
        return h, None
    top = mm.r_max if closed else float(h[-1])
    return h, top


def _classify(h, values, remark=False):
    values = np.asarray(values, dtype=float)
    partial = [(float(a), float(b)) for a, b in zip(h, values)]
    if remark:
        last = h >= h[-1] / 10.0
        slope = math.nan
        if np.all(values[last] > 0) and np.count_nonzero(last) > 1:
            slope = float(np.polyfit(np.log(h[last]), np.log(values[last]), 1)[0])
        return DivergenceVerdict(DIVERGENT, partial, slope, "v <= C/t with C <= (n-m)/2")
    if np.any(np.isposinf(values)):
        return DivergenceVerdict(DIVERGENT, partial, math.inf, "partial integrals overflow")
    if np.any(np.isneginf(values)):
        return DivergenceVerdict(INCONCLUSIVE, partial, math.nan, "partial integrals tend to -infinity")
    last = h >= h[-1] / 10.0
    tail = values[last]
    if abs(tail[-1] - tail[0]) <= CAUCHY_TOL * max(1.0, abs(tail[-1])):
        return DivergenceVerdict(CONVERGENT, partial, 0.0, "Cauchy over the last decade")
    if np.all(tail > 0):
        slope = float(np.polyfit(np.log(h[last]), np.log(tail), 1)[0])
        if slope > GROWTH_EXPONENT:
            return DivergenceVerdict(DIVERGENT, partial, slope, "power growth")
        return DivergenceVerdict(INCONCLUSIVE, partial, slope, "slow growth")
    return DivergenceVerdict(INCONCLUSIVE, partial, math.nan, "partial integrals are not positive")


def check_vm_completeness(mm, horizon_list=DEFAULT_HORIZONS):
    """Classify I(R) = int_0^R exp(-2 V_gamma/(n-m)) as R grows."""
    h, top = _horizon_setup(mm, horizon_list)
    if top is None:
        return DivergenceVerdict(INCONCLUSIVE, [], math.nan, f"profile ends at r_max = {mm.r_max}")
    gq = mmod.GeodesicQuantities(mm.profile.v, mm.n, mm.m, 1.0, top, mm.table_size)
    if mm.profile.closed:
        values = _fold(gq.s_p, top, h)
        return _classify(h, values)
    values = np.asarray(gq.s_p(h))
    t = np.geomspace(1.0, h[-1], 4000) if h[-1] > 1 else np.array([1.0])
    c = float(np.max(t * np.maximum(mm.profile.v(t), 0.0)))
    return _classify(h, values, remark=c <= mm.nm / 2.0)


def _raw_ricci(mm, t):
    p = mm.profile
    v = p.v(t)
    return -(mm.n - 1) * p.curvature_ratio(t) + p.dv(t) + v * v / mm.nm


def check_ambrose(mm, horizon_list=DEFAULT_HORIZONS):
    """Divergence of int_0^R e^{2 V_gamma/(n-m)} Ric_{m,n}(d_r, d_r) dt and the compactness implication."""
    h, top = _horizon_setup(mm, horizon_list)
    if top is None:
        v = DivergenceVerdict(INCONCLUSIVE, [], math.nan, f"profile ends at r_max = {mm.r_max}")
        return v, NOT_IMPLIED
    gq = mmod.GeodesicQuantities(mm.profile.v, mm.n, mm.m, 1.0, top, mm.table_size)
    probe = np.linspace(0.0, top, 20001)[1:]
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        log_size = 2.0 * np.asarray(gq.V_gamma(probe)) / mm.nm + np.log(np.maximum(np.abs(_raw_ricci(mm, probe)), 1.0))
    over = np.flatnonzero(log_size > 600.0)
    cap = top if over.size == 0 else float(probe[max(over[0] - 1, 0)])

    def integrand(t):
        return np.exp(2.0 * np.asarray(gq.V_gamma(t)) / mm.nm) * _raw_ricci(mm, t)

    table = CumulativeIntegral(integrand, table_nodes(cap, mm.table_size))
    if mm.profile.closed:
        values = _fold(table, top, h)
    else:
        values = np.empty_like(h)
        inside = h <= cap
        values[inside] = table(h[inside])
        if np.any(~inside):
            sign = np.sign(float(_raw_ricci(mm, np.array([cap]))[0]))
            values[~inside] = sign * np.inf if sign != 0 else table(cap)
    verdict = _classify(h, values)
    completeness = check_vm_completeness(mm, horizon_list)
    implied = verdict.classification == DIVERGENT and completeness.classification == DIVERGENT
    return verdict, IMPLIED if implied else NOT_IMPLIED


# -- volume comparison ---------------------------------------------------------
def check_volume_element(mm, mf, R=None, grid_size=DEFAULT_GRID_SIZE, tol=DEFAULT_TOL, grid=None):
    """J_V(r1)/J_V(r0) <= sk(s_p(r1))^{n-m}/sk(s_p(r0))^{n-m} for all grid pairs r0 < r1."""
    r = _resolve_grid(mm, R, grid_size, grid)
    hyp, hslack, s = _hypothesis(mm, mf.kappa, r, tol)
    _require_below_delta(mf, float(s[-1]))
    J, JV = mmod.volume_element(mm, r)
    q = np.log(np.asarray(JV)) - mm.nm * np.log(np.asarray(mf.sk_at(s)))
    concl = _running_margin(q)
    verdict = _judge(r, hyp, hslack, concl, np.full_like(q, tol.atol) + tol.rtol * np.abs(q))
    return ComparisonReport("volume_element", r, s, hyp, concl, verdict, tol, {"log_ratio": q})


def _quadruples(points):
    """All (x0, xa, xb, x1) with x0 < xa <= x1 and x0 <= xb < x1 drawn from ``points``."""
    idx = range(len(points))
    out = []
    for i0, i1 in combinations_with_replacement(idx, 2):
        if i0 == i1:
            continue
        for ia in range(i0 + 1, i1 + 1):
            for ib in range(i0, i1):
                out.append((i0, ia, ib, i1))
    q = np.array(out, dtype=int)
    p = np.asarray(points)
    return p[q[:, 0]], p[q[:, 1]], p[q[:, 2]], p[q[:, 3]]


def _annuli_check(measure, model, points, rtol=1e-9):
    x0, xa, xb, x1 = _quadruples(points)
    lhs = np.asarray(measure(xb, x1)) / np.asarray(measure(x0, xa))
    rhs = np.asarray(model(xb, x1)) / np.asarray(model(x0, xa))
    margin = rhs - lhs
    slack = 1e-14 + rtol * np.maximum(np.abs(lhs), np.abs(rhs))
    k = _first(margin < -slack)
    bad = None if k is None else (float(x1[k]), float(margin[k]))
    return bad, float(margin.min()), int(margin.size)


def _bg_points(values, count=7):
    k = np.unique(np.linspace(0, len(values) - 1, count).astype(int))
    return np.asarray(values)[k]


def check_bg_s(mm, mf, grid=None, R=None, grid_size=DEFAULT_GRID_SIZE, tol=DEFAULT_TOL, slack=1e-9):
    """s -> nu_V(C_s)/v(kappa, s) is non-increasing; ``grid`` holds s-values."""
    if grid is None:
        r = default_grid(mm, R, grid_size)
        s = np.asarray(mmod.s_p_eval(mm, r))
    else:
        s = np.asarray(grid, dtype=float)
        if s.size == 0:
            raise EmptyGrid("empty grid")
        r = np.asarray(mmod.invert_s(mm, s))
    _require_below_delta(mf, float(s[-1]))
    hyp, hslack, _ = _hypothesis(mm, mf.kappa, r, tol)
    meas = np.asarray(mmod.measure_sublevel_s(mm, np.zeros_like(s), s))
    model = np.asarray(mmod.model_volume(mf, mm.n, mm.m, np.zeros_like(s), s))
    ratio = meas / model
    concl = _running_margin(ratio)
    bad, qmin, qn = _annuli_check(
        lambda a, b: mmod.measure_sublevel_s(mm, a, b),
        lambda a, b: mmod.model_volume(mf, mm.n, mm.m, a, b),
        _bg_points(s),
        slack,
    )
    verdict = _judge(r, hyp, hslack, concl, 1e-14 + slack * np.abs(ratio), bad)
    details = {"annuli_min_margin": qmin, "annuli_count": qn}
    return ComparisonReport("bg_s", r, s, hyp, concl, verdict, tol, {"ratio": ratio}, details)


def check_bg_r(mm, mf, grid=None, R=None, grid_size=DEFAULT_GRID_SIZE, tol=DEFAULT_TOL, slack=1e-9):
    """r -> mu_V(B_r)/nu_p(kappa, r) is non-increasing; ``grid`` holds r-values."""
    r = _resolve_grid(mm, R, grid_size, grid)
    hyp, hslack, s = _hypothesis(mm, mf.kappa, r, tol)
    _require_below_delta(mf, float(s[-1]))
    zero = np.zeros_like(r)
    meas = np.asarray(mmod.measure_annulus(mm, zero, r, "mu_V"))
    model = np.asarray(mmod.model_volume_r(mm, mf, zero, r))
    ratio = meas / model
    concl = _running_margin(ratio)
    bad, qmin, qn = _annuli_check(
        lambda a, b: mmod.measure_annulus(mm, a, b, "mu_V"),
        lambda a, b: mmod.model_volume_r(mm, mf, a, b),
        _bg_points(r),
        slack,
    )
    verdict = _judge(r, hyp, hslack, concl, 1e-14 + slack * np.abs(ratio), bad)
    details = {"annuli_min_margin": qmin, "annuli_count": qn}
    return ComparisonReport("bg_r", r, s, hyp, concl, verdict, tol, {"ratio": ratio}, details)


def check_ball_growth(mm, r_pairs: Sequence, tol=DEFAULT_TOL, grid_size=DEFAULT_GRID_SIZE):
    """mu_V(B_r2)/mu_V(B_r1) <= e^{2(phi_up(r1) - phi_low(r2))} (r2/r1)^{n-m+1} under Ric_{m,n} >= 0."""
    pairs = np.asarray(r_pairs, dtype=float).reshape(-1, 2)
    if pairs.size == 0:
        raise EmptyGrid("no radius pairs")
    r1, r2 = pairs[:, 0], pairs[:, 1]
    if np.any(r1 <= 0) or np.any(r2 < r1):
        raise ValueError("pairs must satisfy 0 < r1 <= r2")
    R = float(r2.max())
    rg = default_grid(mm, min(R * (1 + 1e-6), mm.extent), grid_size)
    ric, rslack = _nonnegative_ricci(mm, rg, tol)
    gq = mm.geodesic
    zero = np.zeros_like(r1)
    ratio = np.asarray(mmod.measure_annulus(mm, zero, r2)) / np.asarray(mmod.measure_annulus(mm, zero, r1))
    bound = np.exp(2.0 * (np.asarray(gq.phi_upper(r1)) - np.asarray(gq.phi_lower(r2)))) * (r2 / r1) ** (mm.nm + 1)
    concl = bound - ratio
    h_verdict = _judge(rg, ric, rslack, np.zeros_like(rg), np.ones_like(rg))
    if h_verdict.kind == HYPOTHESIS_FAILED:
        verdict = h_verdict
    else:
        verdict = _judge(r1, np.zeros_like(r1), np.ones_like(r1), concl, tol.slack(bound, ratio))
    hyp_at = np.asarray(mmod.modified_ricci_radial(mm, r1))
    s = np.asarray(gq.s_p(r1))
    return ComparisonReport("ball_growth", r1, s, hyp_at, concl, verdict, tol, {"r2": r2, "ratio": ratio, "bound": bound})


def check_kappa0_bound(mm, R=None, grid_size=DEFAULT_GRID_SIZE, tol=DEFAULT_TOL, grid=None, identity_points=100):
    """Delta_V r <= (n-m) / (e^{2 V_gamma/(n-m)} int_0^r e^{-2 V_gamma/(n-m)}) under Ric_{m,n} >= 0."""
    r = _resolve_grid(mm, R, grid_size, grid)
    ric, rslack = _nonnegative_ricci(mm, r, tol)
    gq = mm.geodesic

    def both_forms(x):
        V = np.asarray(gq.V_gamma(x))
        s = np.asarray(gq.s_p(x))
        direct = mm.nm / (np.exp(2.0 * V / mm.nm) * (s / mm.c_p))
        via_cot = mm.nm * (1.0 / s) * np.exp(-2.0 * V / mm.nm) * mm.c_p
        return direct, via_cot, s

    rhs, _, s = both_forms(r)
    lhs = np.asarray(mmod.v_laplacian_r(mm, r))
    concl = rhs - lhs
    rng = np.random.default_rng(0)
    probe = np.sort(rng.uniform(r[0], r[-1], identity_points))
    a, b, _ = both_forms(probe)
    dev = float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(a))))
    extra = None if dev <= 1e-10 else (float(probe[0]), -dev)
    verdict = _judge(r, ric - 0.0, rslack, concl, tol.slack(lhs, rhs), extra)
    return ComparisonReport("kappa0", r, s, ric, concl, verdict, tol, {"lhs": lhs, "rhs": rhs}, {"identity_deviation": dev})


def find_best_constant_kappa(mm, R=None, grid_size=DEFAULT_GRID_SIZE, grid=None):
    """Largest constant kappa satisfying the curvature hypothesis on the grid."""
    r = _resolve_grid(mm, R, grid_size, grid)
    ric = np.asarray(mmod.modified_ricci_radial(mm, r))
    V = np.asarray(mmod.v_gamma(mm, r))
    with np.errstate(over="ignore"):
        vals = ric * np.exp(4.0 * V / mm.nm) / (mm.nm * mm.c_p ** 2)
    return float(np.min(vals))
