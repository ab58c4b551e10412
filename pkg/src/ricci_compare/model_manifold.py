"""Rotationally symmetric weighted model manifolds.

The metric is ``g = dr^2 + f(r)^2 g_{S^{n-1}}`` and the drift is the radial
field ``V = v(r) d/dr``.  In this class the radial geodesic from the pole
realizes every infimum over geodesics, so ``V_gamma``, ``phi_V`` and ``s_p``
are plain cumulative integrals along ``r``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from ._quadrature import CumulativeIntegral, sphere_area, table_nodes
from .errors import (
    DeltaExceeded,
    NumericalFailure,
    OutOfDomain,
    OutOfRange,
    PoleSingularity,
    ReversedBounds,
)
from .model_functions import check_dimensions

#: below this radius f'/f and f''/f are taken from Taylor expansions at the pole
POLE_THRESHOLD = 1e-6
DEFAULT_EXTENT = 30.0


def _const(c):
    return lambda r: np.full_like(np.asarray(r, dtype=float), c)


@dataclass(frozen=True)
class RadialProfile:
    """Warping function ``f`` and radial drift ``v`` with their derivatives.

    All callables are vectorized over ``r``.  ``closed`` marks profiles whose
    warping function vanishes smoothly at ``r_max`` (the far pole of a closed
    manifold, e.g. the round sphere).  ``phi0`` is set when ``v`` comes from a
    potential ``phi`` and records ``phi(0)``.
    """

    f: Callable
    df: Callable
    d2f: Callable
    v: Callable
    dv: Callable
    r_max: float = math.inf
    closed: bool = False
    phi0: Optional[float] = None
    label: str = "custom"
    spec: dict = field(default_factory=dict, compare=False)
    check_pole: bool = field(default=True, compare=False)
    #: optional closed forms of f'/f and f''/f, used away from the pole
    dlogf: Optional[Callable] = field(default=None, compare=False)
    d2f_over_f: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.r_max > 0:
            raise ValueError("r_max must be positive")
        if not self.check_pole:
            return
        f0 = float(self.f(np.array([0.0]))[0])
        df0 = float(self.df(np.array([0.0]))[0])
        if abs(f0) > 1e-8 or abs(df0 - 1.0) > 1e-8:
            raise ValueError(f"warping function must satisfy f(0)=0, f'(0)=1 (got {f0:.3g}, {df0:.3g})")
        top = self.r_max if math.isfinite(self.r_max) else DEFAULT_EXTENT
        probe = np.linspace(0.0, top, 513)[1:-1]
        if np.any(self.f(probe) <= 0):
            raise ValueError("warping function must be positive on (0, r_max)")
        if self.phi0 is not None and abs(float(self.v(np.array([0.0]))[0])) > 1e-12:
            raise ValueError("a radial potential needs phi'(0) = 0")

    # -- factories ----------------------------------------------------------
    @staticmethod
    def warping(kind):
        """(f, f', f'', r_max, closed, f'/f, f''/f) for the selectors 'r', 'sin', 'sinh'."""
        if kind == "r":
            return (lambda r: np.asarray(r, dtype=float) * 1.0, _const(1.0), _const(0.0), math.inf, False,
                    lambda r: 1.0 / np.asarray(r, dtype=float), _const(0.0))
        if kind == "sin":
            return (np.sin, np.cos, lambda r: -np.sin(r), math.pi, True,
                    lambda r: 1.0 / np.tan(r), _const(-1.0))
        if kind == "sinh":
            return (np.sinh, np.cosh, np.sinh, math.inf, False,
                    lambda r: 1.0 / np.tanh(r), _const(1.0))
        raise ValueError(f"unknown warping selector {kind!r}")

    @staticmethod
    def drift(kind, c=1.0):
        """(v, v') for 'zero', 'constant' (c), 'linear' (c r) and 'log' (c / (1 + r))."""
        c = float(c)
        if kind == "zero":
            return _const(0.0), _const(0.0)
        if kind == "constant":
            return _const(c), _const(0.0)
        if kind == "linear":
            return (lambda r: c * np.asarray(r, dtype=float)), _const(c)
        if kind == "log":
            return (lambda r: c / (1.0 + np.asarray(r, dtype=float))), (lambda r: -c / (1.0 + np.asarray(r, dtype=float)) ** 2)
        raise ValueError(f"unknown drift selector {kind!r}")

    @classmethod
    def from_selectors(cls, warping="r", drift="zero", c=1.0, r_max=None, label=None):
        f, df, d2f, rmax, closed, q1, q2 = cls.warping(warping)
        v, dv = cls.drift(drift, c)
        if r_max is not None and r_max < rmax:
            rmax, closed = float(r_max), False
        spec = {"warping": warping, "drift": drift, "c": float(c)}
        return cls(f, df, d2f, v, dv, rmax, closed, None, label or f"{warping}/{drift}", spec,
                   dlogf=q1, d2f_over_f=q2)

    @classmethod
    def from_potential(cls, warping, phi, dphi, d2phi, r_max=None, label="potential"):
        """Gradient drift ``v = phi'`` from a radial potential with ``phi'(0) = 0``."""
        f, df, d2f, rmax, closed, q1, q2 = cls.warping(warping)
        if r_max is not None and r_max < rmax:
            rmax, closed = float(r_max), False
        return cls(f, df, d2f, dphi, d2phi, rmax, closed, float(phi(np.array([0.0]))[0]), label,
                   dlogf=q1, d2f_over_f=q2)

    @classmethod
    def from_samples(cls, r_f, f_values, r_v=None, v_values=None, label="spline"):
        """Cubic-spline profile from sampled ``f`` and (optionally) ``v``."""
        fs = CubicSpline(np.asarray(r_f, float), np.asarray(f_values, float))
        rmax = float(np.asarray(r_f)[-1])
        if v_values is None:
            v, dv = cls.drift("zero")
        else:
            vs = CubicSpline(np.asarray(r_v, float), np.asarray(v_values, float))
            rmax = min(rmax, float(np.asarray(r_v)[-1]))
            v, dv = vs, vs.derivative()
        return cls(fs, fs.derivative(), fs.derivative(2), v, dv, rmax, False, None, label, {"spline": True})

    @classmethod
    def from_csv(cls, f_path, v_path=None, label="spline"):
        r_f, f_vals = _read_two_columns(f_path)
        if v_path is None:
            return cls.from_samples(r_f, f_vals, label=label)
        r_v, v_vals = _read_two_columns(v_path)
        return cls.from_samples(r_f, f_vals, r_v, v_vals, label=label)

    def perturbed(self, p, dp, d2p, label=None):
        """Replace ``f`` by ``f * p`` (product rule for the derivatives)."""
        f, df, d2f = self.f, self.df, self.d2f
        return replace(
            self,
            f=lambda r: f(r) * p(r),
            df=lambda r: df(r) * p(r) + f(r) * dp(r),
            d2f=lambda r: d2f(r) * p(r) + 2 * df(r) * dp(r) + f(r) * d2p(r),
            closed=False,
            label=label or f"{self.label}*perturbed",
            dlogf=None,
            d2f_over_f=None,
        )

    # -- pole-safe ratios --------------------------------------------------
    def _pole_coefficients(self):
        # f = r + a r^2 + b r^3 + ...; third derivative from a one-sided stencil of f''
        h = 1e-3
        d2 = self.d2f(np.array([0.0, h, 2 * h, 3 * h]))
        a = 0.5 * d2[0]
        b = (-11 * d2[0] + 18 * d2[1] - 9 * d2[2] + 2 * d2[3]) / (6 * h) / 6.0
        return a, b

    def log_derivative(self, r):
        """f'(r) / f(r); Taylor series ``1/r + a + (2b - a^2) r`` below POLE_THRESHOLD."""
        r = np.asarray(r, dtype=float)
        if self.dlogf is not None:
            return np.asarray(self.dlogf(r), dtype=float)
        out = np.empty_like(r)
        small = r < POLE_THRESHOLD
        if np.any(~small):
            rr = r[~small]
            out[~small] = self.df(rr) / self.f(rr)
        if np.any(small):
            a, b = self._pole_coefficients()
            rr = r[small]
            out[small] = 1.0 / rr + a + (2 * b - a * a) * rr
        return out

    def curvature_ratio(self, r):
        """f''(r) / f(r); Taylor series ``2a/r + 6b - 2a^2`` below POLE_THRESHOLD."""
        r = np.asarray(r, dtype=float)
        if self.d2f_over_f is not None:
            return np.asarray(self.d2f_over_f(r), dtype=float)
        out = np.empty_like(r)
        small = r < POLE_THRESHOLD
        if np.any(~small):
            rr = r[~small]
            out[~small] = self.d2f(rr) / self.f(rr)
        if np.any(small):
            a, b = self._pole_coefficients()
            rr = r[small]
            out[small] = 2 * a / rr + 6 * b - 2 * a * a
        return out


def _read_two_columns(path):
    data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    if data.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns (r, value)")
    return data[:, 0], data[:, 1]


class GeodesicQuantities:
    """Cumulative tables along the radial geodesic.

    ``V_gamma(r) = int_0^r v``, ``phi_V = V_gamma``, running extrema of
    ``phi_V`` on [0, r], and ``s_p(r) = C_p int_0^r exp(-2 V_gamma / (n - m))``.
    """

    def __init__(self, v, n, m, c_p, extent, size=4096):
        self.n, self.m, self.c_p, self.extent = n, m, c_p, float(extent)
        nodes = table_nodes(self.extent, size)
        self._V = CumulativeIntegral(v, nodes)
        nm = n - m
        self._s = CumulativeIntegral(lambda t: c_p * np.exp(-2.0 * self._V(t) / nm), nodes)
        grid = self._s.nodes
        self._grid = grid
        self._V_nodes = self._V(grid)
        self._run_max = np.maximum.accumulate(np.maximum(self._V_nodes, 0.0))
        self._run_min = np.minimum.accumulate(np.minimum(self._V_nodes, 0.0))
        self._s_nodes = self._s.table
        self._check_monotone()

    def _check_monotone(self):
        # increments may underflow to zero once the integrand is negligible
        if np.any(np.diff(self._s_nodes) < 0):
            raise NumericalFailure("s_p table is decreasing")

    def _check(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < 0) or np.any(r > self.extent) or np.any(np.isnan(r)):
            raise OutOfDomain(f"r outside the tabulated range [0, {self.extent}]")
        return r

    def V_gamma(self, r):
        return self._V(self._check(r))

    phi_V = V_gamma

    def phi_upper(self, r):
        """sup of phi_V over the ball of radius r (at least 0)."""
        r = self._check(r)
        k = np.clip(np.searchsorted(self._grid, r, side="right") - 1, 0, None)
        out = np.maximum(self._run_max[k], np.asarray(self._V(r)))
        return out if out.ndim else float(out)

    def phi_lower(self, r):
        """inf of phi_V over the ball of radius r (at most 0)."""
        r = self._check(r)
        k = np.clip(np.searchsorted(self._grid, r, side="right") - 1, 0, None)
        out = np.minimum(self._run_min[k], np.asarray(self._V(r)))
        return out if out.ndim else float(out)

    def s_p(self, r):
        return self._s(self._check(r))

    def ds_dr(self, r):
        return self.c_p * np.exp(-2.0 * np.asarray(self._V(self._check(r))) / (self.n - self.m))

    @property
    def s_sup(self):
        """s_p at the end of the tabulated range."""
        return float(self._s_nodes[-1])

    def invert(self, s, rtol=1e-10):
        """Unique r with s_p(r) = s, by safeguarded Newton steps inside one table cell.

        Iterates until the update stalls at rounding level; ``rtol`` bounds
        the final residual in s.
        """
        s = np.asarray(s, dtype=float)
        if np.any(s < 0) or np.any(s > self.s_sup * (1 + 1e-15)) or np.any(np.isnan(s)):
            raise OutOfRange(f"s outside [0, {self.s_sup}]")
        s = np.minimum(s, self.s_sup)
        S, R = self._s_nodes, self._grid
        k = np.clip(np.searchsorted(S, s, side="right") - 1, 0, R.size - 2)
        lo, hi = R[k].copy(), R[k + 1].copy()
        gap = S[k + 1] - S[k]
        w = np.where(gap > 0, (s - S[k]) / np.where(gap > 0, gap, 1.0), 0.0)
        r = lo + w * (hi - lo)
        for _ in range(60):
            res = np.asarray(self._s(r)) - s
            hi = np.where(res > 0, r, hi)
            lo = np.where(res < 0, r, lo)
            with np.errstate(divide="ignore", invalid="ignore"):
                step = r - res / np.asarray(self.ds_dr(r))
            inside = (step >= lo) & (step <= hi) & np.isfinite(step)
            new = np.where(res == 0, r, np.where(inside, step, 0.5 * (lo + hi)))
            moved = np.abs(new - r) > 4e-16 * np.maximum(np.abs(r), 1e-300)
            r = new
            if not np.any(moved):
                break
        res = np.asarray(self._s(r)) - s
        if np.any(np.abs(res) > rtol * np.maximum(np.abs(s), 1.0)):
            raise NumericalFailure("invert_s did not converge")
        return r if r.ndim else float(r)


class ModelManifold:
    """Weighted model ``(n, m, profile, C_p)`` with ``m <= 1 < n``-type constraint ``n > m``.

    Tables cover ``[0, extent]`` where ``extent = r_max`` for bounded domains
    and ``DEFAULT_EXTENT`` (configurable) otherwise.
    """

    def __init__(self, n, m, profile, c_p=None, extent=None, table_size=4096, geodesic=None):
        if int(n) != n or n < 2:
            raise ValueError("n must be an integer >= 2")
        check_dimensions(n, m)
        self.n = int(n)
        self.m = float(m)
        self.profile = profile
        if c_p is None:
            c_p = 1.0 if profile.phi0 is None else math.exp(-2.0 * profile.phi0 / (self.n - self.m))
        if not c_p > 0:
            raise ValueError("C_p must be positive")
        self.c_p = float(c_p)
        if extent is None:
            extent = profile.r_max if math.isfinite(profile.r_max) else DEFAULT_EXTENT
        if extent > profile.r_max:
            raise ValueError("extent exceeds r_max")
        self.extent = float(extent)
        self.table_size = table_size
        self._gq = geodesic
        self._cache = {}

    def __repr__(self):
        return f"ModelManifold(n={self.n}, m={self.m:g}, profile={self.profile.label}, c_p={self.c_p:g})"

    @property
    def nm(self):
        return self.n - self.m

    @property
    def r_max(self):
        return self.profile.r_max

    @property
    def geodesic(self):
        if self._gq is None:
            self._gq = GeodesicQuantities(self.profile.v, self.n, self.m, self.c_p, self.extent, self.table_size)
        return self._gq

    def with_m(self, m, c_p=None):
        return ModelManifold(self.n, m, self.profile, self.c_p if c_p is None else c_p, self.extent, self.table_size)

    def with_profile(self, profile):
        return ModelManifold(self.n, self.m, profile, self.c_p, min(self.extent, profile.r_max), self.table_size)

    def _open(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise PoleSingularity("quantity is singular at the pole r = 0")
        if np.any(r >= self.r_max) or np.any(r > self.extent):
            raise OutOfDomain(f"r outside (0, {min(self.r_max, self.extent)})")
        return r

    def _weight_table(self, kind):
        if kind not in self._cache:
            gq, prof, n, nm = self.geodesic, self.profile, self.n, self.nm
            if kind == "mu_V":
                expo = 1.0
            elif kind == "nu_V":
                expo = (nm + 2.0) / nm
            else:
                raise ValueError(f"unknown weight {kind!r}")

            def integrand(t):
                ft = np.clip(prof.f(t), 1e-300, None)
                return np.exp(-expo * np.asarray(gq.V_gamma(t)) + (n - 1) * np.log(ft))

            self._cache[kind] = CumulativeIntegral(integrand, table_nodes(self.extent, self.table_size))
        return self._cache[kind]


def _out(x):
    x = np.asarray(x)
    return x if x.ndim else float(x)


def v_gamma(mm, r):
    """int_0^r v(u) du along the radial geodesic."""
    return mm.geodesic.V_gamma(r)


def s_p_eval(mm, r):
    """Re-parametrized distance C_p int_0^r exp(-2 V_gamma / (n - m))."""
    return mm.geodesic.s_p(r)


def invert_s(mm, s):
    return mm.geodesic.invert(s)


def laplacian_r(mm, r):
    """Laplacian of the distance function, (n - 1) f'/f."""
    r = mm._open(r)
    return _out((mm.n - 1) * mm.profile.log_derivative(r))


def v_laplacian_r(mm, r):
    """V-Laplacian of the distance function, (n - 1) f'/f - v."""
    r = mm._open(r)
    return _out((mm.n - 1) * mm.profile.log_derivative(r) - mm.profile.v(r))


def modified_ricci_radial(mm, r):
    """Ric_{m,n}(Delta_V)(d_r, d_r) = -(n-1) f''/f + v' + v^2 / (n - m)."""
    r = mm._open(r)
    p = mm.profile
    v = p.v(r)
    return _out(-(mm.n - 1) * p.curvature_ratio(r) + p.dv(r) + v * v / mm.nm)


def lambda_eval(mm, r):
    """C_p^{-1} exp(2 V_gamma / (n - m)) times the V-Laplacian of r."""
    r = mm._open(r)
    return _out(np.exp(2.0 * np.asarray(v_gamma(mm, r)) / mm.nm) / mm.c_p * np.asarray(v_laplacian_r(mm, r)))


def volume_element(mm, r):
    """(J, J_V) with J = f^{n-1} and J_V = exp(-V_gamma) J."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r > min(mm.r_max, mm.extent)):
        raise OutOfDomain("r outside the domain")
    J = np.asarray(mm.profile.f(r), dtype=float) ** (mm.n - 1)
    JV = np.exp(-np.asarray(v_gamma(mm, r))) * J
    return _out(J), _out(JV)


def measure_annulus(mm, r0, r1, weight="mu_V"):
    """Weighted volume of {r0 <= r <= r1}; ``weight`` is 'mu_V' or 'nu_V'."""
    r0 = np.asarray(r0, dtype=float)
    r1 = np.asarray(r1, dtype=float)
    if np.any(r0 > r1):
        raise ReversedBounds("r0 must not exceed r1")
    table = mm._weight_table(weight)
    return _out(sphere_area(mm.n) * (np.asarray(table(r1)) - np.asarray(table(r0))))


def measure_sublevel_s(mm, s0, s1):
    """nu_V of {s0 <= s_p <= s1}."""
    s0 = np.asarray(s0, dtype=float)
    s1 = np.asarray(s1, dtype=float)
    if np.any(s0 > s1):
        raise ReversedBounds("s0 must not exceed s1")
    return measure_annulus(mm, invert_s(mm, s0), invert_s(mm, s1), "nu_V")


def model_volume(mf, n, m, s0, s1):
    """omega_{n-1} int_{s0}^{s1} sk(s)^{n-m} ds."""
    check_dimensions(n, m)
    s0 = np.asarray(s0, dtype=float)
    s1 = np.asarray(s1, dtype=float)
    if np.any(s0 > s1):
        raise ReversedBounds("s0 must not exceed s1")
    top = min(mf.delta_kappa, mf.s_max)
    if np.any(s0 < 0) or np.any(s1 > top * (1 + 1e-12)):
        raise OutOfDomain("model volume needs 0 <= s0 <= s1 <= delta_kappa within the solved range")
    table = mf.power_integral(n - m)
    s0, s1 = np.minimum(s0, table.hi), np.minimum(s1, table.hi)
    return _out(sphere_area(n) * (np.asarray(table(s1)) - np.asarray(table(s0))))


def model_volume_r(mm, mf, r0, r1):
    """omega_{n-1} int_{r0}^{r1} sk(s_p(r))^{n-m} dr."""
    r0 = np.asarray(r0, dtype=float)
    r1 = np.asarray(r1, dtype=float)
    if np.any(r0 > r1):
        raise ReversedBounds("r0 must not exceed r1")
    gq = mm.geodesic
    top_s = min(mf.delta_kappa, mf.s_max)
    if np.any(np.asarray(gq.s_p(r1)) > top_s * (1 + 1e-12)):
        raise DeltaExceeded("s_p(r1) exceeds delta_kappa or the solved range")
    key = ("model_r", id(mf))
    if key not in mm._cache:
        r_top = mm.extent if gq.s_sup <= top_s else float(gq.invert(top_s))
        nm = mm.nm

        def integrand(t):
            sk = mf._sk_interp(np.minimum(np.asarray(gq.s_p(t)), top_s))
            return np.exp(nm * np.log(np.clip(sk, 1e-300, None)))

        mm._cache[key] = (mf, CumulativeIntegral(integrand, table_nodes(r_top, mm.table_size)))
    table = mm._cache[key][1]
    r1 = np.minimum(r1, table.hi)
    return _out(sphere_area(mm.n) * (np.asarray(table(r1)) - np.asarray(table(r0))))
