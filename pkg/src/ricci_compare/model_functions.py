"""Model functions of a curvature profile kappa(s).

The Jacobi solution ``sk`` solves ``sk'' + kappa sk = 0`` with ``sk(0) = 0``
and ``sk'(0) = 1``.  Its logarithmic derivative ``cot_kappa = sk'/sk`` solves
the Riccati equation ``-a' = kappa + a**2`` with ``s a(s) -> 1`` at 0, and
``delta_kappa`` is the first positive zero of ``sk``.  We integrate the Jacobi
form because its initial data are regular.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline, CubicSpline, PPoly
from scipy.optimize import bisect, brentq

from .errors import (
    DomainExceeded,
    InvalidDimension,
    NonFiniteKappa,
    NotSymmetric,
    OutOfDomain,
    StepUnderflow,
)

#: below this s, cot_kappa switches to the series 1/s - kappa(0) s / 3
SERIES_THRESHOLD = 1e-4
#: grid spacing used to store (sk, sk') for Hermite interpolation
NODE_SPACING = 1e-3
MAX_NODES = 400_001


@dataclass(frozen=True)
class KappaProfile:
    """A continuous lower-bound function kappa on [0, horizon].

    Use the constructors :meth:`constant`, :meth:`piecewise_polynomial`,
    :meth:`sampled` or :meth:`from_function` rather than the raw fields.
    """

    kind: str
    params: dict
    horizon: float
    symmetric_about: Optional[float] = None
    _fn: Callable = field(default=None, repr=False, compare=False)

    # -- constructors -----------------------------------------------------
    @classmethod
    def constant(cls, value, horizon=math.inf, symmetric_about=None):
        value = float(value)
        if not math.isfinite(value):
            raise NonFiniteKappa(f"constant kappa must be finite, got {value}")
        fn = lambda s: np.full_like(np.asarray(s, dtype=float), value)
        return cls._make("constant", {"value": value}, horizon, symmetric_about, fn)

    @classmethod
    def piecewise_polynomial(cls, breakpoints, coefficients, horizon=None, symmetric_about=None):
        """Piecewise polynomial with ``coefficients[i][j]`` multiplying ``(s - b_i)**j``.

        ``breakpoints`` starts at 0 and has one more entry than
        ``coefficients``; the last piece is extended up to ``horizon``.
        """
        b = np.asarray(breakpoints, dtype=float)
        if b.ndim != 1 or b.size < 2 or b[0] != 0.0 or np.any(np.diff(b) <= 0):
            raise ValueError("breakpoints must be strictly increasing and start at 0")
        if len(coefficients) != b.size - 1:
            raise ValueError("need one coefficient row per piece")
        deg = max(len(row) for row in coefficients)
        c = np.zeros((deg, b.size - 1))
        for i, row in enumerate(coefficients):
            # PPoly stores descending powers
            c[deg - len(row):, i] = np.asarray(row, dtype=float)[::-1]
        if not np.all(np.isfinite(c)):
            raise NonFiniteKappa("non-finite polynomial coefficient")
        horizon = float(b[-1] if horizon is None else horizon)
        pp = PPoly(c, b, extrapolate=True)
        for i in range(1, b.size - 1):
            left = np.polyval(c[:, i - 1], b[i] - b[i - 1])
            right = c[-1, i]
            if abs(left - right) > 1e-10 * max(1.0, abs(right)):
                raise ValueError(f"piecewise polynomial is discontinuous at s={b[i]}")
        params = {"breakpoints": b.tolist(), "coefficients": [list(map(float, r)) for r in coefficients]}
        return cls._make("piecewise_polynomial", params, horizon, symmetric_about, pp)

    @classmethod
    def sampled(cls, s_values, kappa_values, horizon=None, symmetric_about=None):
        s = np.asarray(s_values, dtype=float)
        k = np.asarray(kappa_values, dtype=float)
        if s.ndim != 1 or s.size < 4 or s[0] != 0.0 or np.any(np.diff(s) <= 0):
            raise ValueError("sampled s-values must be strictly increasing, start at 0, and have >= 4 points")
        if s.shape != k.shape:
            raise ValueError("s-values and kappa-values differ in length")
        if not np.all(np.isfinite(k)):
            raise NonFiniteKappa("non-finite sampled kappa value")
        horizon = float(s[-1] if horizon is None else horizon)
        if horizon > s[-1]:
            raise ValueError("sampled profile cannot be extended past its last sample")
        spline = CubicSpline(s, k)
        params = {"s": s.tolist(), "kappa": k.tolist()}
        return cls._make("sampled", params, horizon, symmetric_about, spline)

    @classmethod
    def from_function(cls, fn, horizon, symmetric_about=None, label="function"):
        """Wrap a vectorized callable; not serializable to a config file."""
        return cls._make("function", {"label": label}, horizon, symmetric_about, fn)

    @classmethod
    def _make(cls, kind, params, horizon, symmetric_about, fn):
        horizon = float(horizon)
        if not horizon > 0:
            raise ValueError("horizon must be positive")
        prof = cls(kind, params, horizon, None if symmetric_about is None else float(symmetric_about), fn)
        if prof.symmetric_about is not None:
            prof.check_symmetry()
        return prof

    # -- evaluation -------------------------------------------------------
    def __call__(self, s):
        s_arr = np.asarray(s, dtype=float)
        if np.any(s_arr < 0) or np.any(s_arr > self.horizon * (1 + 1e-12)):
            raise OutOfDomain(f"kappa evaluated outside [0, {self.horizon}]")
        out = np.asarray(self._fn(s_arr), dtype=float)
        if out.shape != s_arr.shape:
            out = np.broadcast_to(out, s_arr.shape).copy()
        return out if out.ndim else float(out)

    @property
    def is_constant(self):
        return self.kind == "constant"

    def scaled(self, factor):
        """Return ``factor * kappa`` with the same kind, horizon and symmetry flag."""
        factor = float(factor)
        if self.kind == "constant":
            return KappaProfile.constant(factor * self.params["value"], self.horizon)
        if self.kind == "piecewise_polynomial":
            coeffs = [[factor * c for c in row] for row in self.params["coefficients"]]
            return KappaProfile.piecewise_polynomial(self.params["breakpoints"], coeffs, self.horizon)
        if self.kind == "sampled":
            return KappaProfile.sampled(self.params["s"], factor * np.asarray(self.params["kappa"]), self.horizon)
        fn = self._fn
        return KappaProfile.from_function(lambda s: factor * fn(s), self.horizon, label=self.params.get("label", "function"))

    def with_symmetry(self, delta):
        return KappaProfile._make(self.kind, self.params, self.horizon, delta, self._fn)

    def check_symmetry(self, delta=None, atol=1e-10):
        delta = self.symmetric_about if delta is None else float(delta)
        if delta > self.horizon * (1 + 1e-12):
            raise NotSymmetric(f"symmetry point {delta} lies beyond the horizon {self.horizon}")
        s = np.linspace(0.0, delta, 1001)
        dev = np.max(np.abs(self(s) - self(np.clip(delta - s, 0.0, None))))
        if dev > atol:
            raise NotSymmetric(f"kappa(s) - kappa({delta} - s) reaches {dev:.3e}")
        return dev

    def to_config(self):
        if self.kind == "function":
            raise ValueError("function-valued profiles cannot be serialized")
        out = {"kind": self.kind, **self.params}
        if math.isfinite(self.horizon):
            out["horizon"] = self.horizon
        if self.symmetric_about is not None:
            out["symmetric_about"] = self.symmetric_about
        return out


class ModelFunctions:
    """Solved Jacobi pair (sk, sk') on a uniform grid with Hermite dense output.

    ``sk`` is interpolated with the cubic Hermite spline through (sk, sk');
    ``sk'`` with the cubic Hermite spline through (sk', sk'') where
    ``sk'' = -kappa sk``.  Instances are not modified after construction
    apart from memoized quadrature tables.
    """

    def __init__(self, kappa, grid, sk, sk_prime, tol):
        self.kappa = kappa
        self.grid = grid
        self.sk = sk
        self.sk_prime = sk_prime
        self.tol = tol
        self._sk_interp = CubicHermiteSpline(grid, sk, sk_prime)
        self._skp_interp = CubicHermiteSpline(grid, sk_prime, -kappa(grid) * sk)
        self.delta_note = ""
        self.delta_kappa = self._locate_first_zero()
        self._cache = {}

    @property
    def s_max(self):
        return float(self.grid[-1])

    @property
    def kappa0(self):
        return float(self.kappa(0.0))

    def __repr__(self):
        return f"ModelFunctions(kappa={self.kappa.kind}, s_max={self.s_max:g}, delta_kappa={self.delta_kappa!r})"

    def _check_range(self, s):
        if np.any(s < 0) or np.any(s > self.s_max):
            raise OutOfDomain(f"s outside the solved range [0, {self.s_max}]")

    def sk_at(self, s):
        s = np.asarray(s, dtype=float)
        self._check_range(s)
        out = self._sk_interp(s)
        return out if out.ndim else float(out)

    def sk_prime_at(self, s):
        s = np.asarray(s, dtype=float)
        self._check_range(s)
        out = self._skp_interp(s)
        return out if out.ndim else float(out)

    def _locate_first_zero(self):
        sk = self.sk
        hits = np.flatnonzero(sk[1:] <= 0.0)
        if hits.size == 0:
            # interior local minima of sk that come close to zero
            dips = np.flatnonzero((self.sk_prime[:-1] < 0) & (self.sk_prime[1:] >= 0)) + 1
            smallest = float(sk[dips].min()) if dips.size else math.inf
            scale = float(np.abs(sk).max())
            if smallest < 1e-8 * max(scale, 1.0):
                self.delta_note = f"NoZeroDetected: grazing minimum {smallest:.3e} without sign change"
            else:
                self.delta_note = "no zero within horizon"
            return math.inf
        i = hits[0] + 1
        if sk[i] == 0.0:
            return float(self.grid[i])
        a, b = float(self.grid[i - 1]), float(self.grid[i])
        return float(bisect(self._sk_interp, a, b, xtol=1e-15 * b, rtol=1e-15, maxiter=200))

    def cot(self, s):
        return cot_kappa(self, s)

    def m(self, s, n, m):
        return m_kappa(self, s, n, m)

    def jacobi_residual(self):
        """Max |sk'' + kappa sk| at interior nodes, using 4th-order differences of sk'."""
        h = self.grid[1] - self.grid[0]
        p = self.sk_prime
        d2 = (-p[4:] + 8 * p[3:-1] - 8 * p[1:-3] + p[:-4]) / (12 * h)
        res = np.abs(d2 + self.kappa(self.grid[2:-2]) * self.sk[2:-2])
        return float(res.max()) if res.size else 0.0

    def power_integral(self, exponent):
        """Cumulative table of int_0^s sk(t)**exponent dt on [0, min(delta, s_max)]."""
        from ._quadrature import CumulativeIntegral

        key = ("power", float(exponent))
        if key not in self._cache:
            top = min(self.delta_kappa, self.s_max)
            nodes = self.grid[self.grid <= top]
            if nodes[-1] < top:
                nodes = np.append(nodes, top)

            def integrand(t):
                val = self._sk_interp(t)
                return np.exp(exponent * np.log(np.clip(val, 1e-300, None)))

            self._cache[key] = CumulativeIntegral(integrand, nodes)
        return self._cache[key]


def solve_jacobi(kappa, s_max, tol=1e-13, max_step=0.05):
    """Integrate ``sk'' + kappa(s) sk = 0``, ``sk(0)=0``, ``sk'(0)=1`` on [0, s_max].

    Uses the DOP853 pair with its step capped at ``max_step``; the result is
    sampled on a uniform grid of spacing at most ``NODE_SPACING``.
    """
    s_max = float(s_max)
    if not s_max > 0:
        raise ValueError("s_max must be positive")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if s_max > kappa.horizon * (1 + 1e-12):
        raise OutOfDomain(f"s_max={s_max} exceeds the kappa horizon {kappa.horizon}")
    s_max = min(s_max, kappa.horizon)
    n_nodes = min(max(2001, int(math.ceil(s_max / NODE_SPACING)) + 1), MAX_NODES)
    grid = np.linspace(0.0, s_max, n_nodes)
    kvals = kappa(grid)
    if not np.all(np.isfinite(kvals)):
        raise NonFiniteKappa("kappa is not finite on the integration interval")

    if kappa.is_constant:
        k0 = kappa.params["value"]

        def rhs(s, y):
            return [y[1], -k0 * y[0]]
    else:
        raw = kappa._fn

        def rhs(s, y):
            # range checks were done on the grid above
            k = float(raw(min(s, s_max)))
            if not math.isfinite(k):
                raise NonFiniteKappa(f"kappa({s}) is not finite")
            return [y[1], -k * y[0]]

    rtol = max(tol, 2.3e-14)
    sol = solve_ivp(rhs, (0.0, s_max), [0.0, 1.0], method="DOP853", t_eval=grid,
                    rtol=rtol, atol=rtol * 1e-3, max_step=max_step)
    if not sol.success:
        raise StepUnderflow(f"Jacobi integration failed: {sol.message}")
    sk, skp = sol.y
    if not (np.all(np.isfinite(sk)) and np.all(np.isfinite(skp))):
        raise StepUnderflow("Jacobi solution overflowed")
    return ModelFunctions(kappa, grid, sk, skp, tol)


def first_zero(mf):
    """First positive zero of sk, or ``math.inf`` if none lies within the solved range."""
    return mf.delta_kappa


def closed_form_constant(kappa_value, s):
    """(sk, cot_kappa) at ``s`` for a constant curvature ``kappa_value``."""
    k = float(kappa_value)
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0):
        raise OutOfDomain("s must be non-negative")
    if k > 0:
        rk = math.sqrt(k)
        if np.any(s_arr > math.pi / rk * (1 + 1e-15)):
            raise DomainExceeded(f"s must not exceed pi/sqrt(kappa) = {math.pi / rk}")
        sk = np.sin(rk * s_arr) / rk
        with np.errstate(divide="ignore"):
            cot = rk / np.tan(rk * s_arr)
    elif k == 0:
        sk = s_arr.copy()
        with np.errstate(divide="ignore"):
            cot = 1.0 / s_arr
    else:
        rk = math.sqrt(-k)
        sk = np.sinh(rk * s_arr) / rk
        with np.errstate(divide="ignore"):
            cot = rk / np.tanh(rk * s_arr)
    if sk.ndim == 0:
        return float(sk), float(cot)
    return sk, cot


def cot_kappa(mf, s):
    """``sk'(s) / sk(s)``; for s below ``SERIES_THRESHOLD`` the series ``1/s - kappa(0) s / 3``."""
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0) or np.any(s >= mf.delta_kappa) or np.any(s > mf.s_max):
        raise OutOfDomain("cot_kappa needs 0 < s < delta_kappa inside the solved range")
    small = s < SERIES_THRESHOLD
    out = np.empty_like(s)
    if np.any(small):
        ss = s[small]
        out[small] = 1.0 / ss - mf.kappa0 * ss / 3.0
    if np.any(~small):
        sl = s[~small]
        out[~small] = mf._skp_interp(sl) / mf._sk_interp(sl)
    return out if out.ndim else float(out)


def check_dimensions(n, m):
    if m > 1:
        raise InvalidDimension(f"m must be <= 1, got {m}")
    if not n > m:
        raise InvalidDimension(f"n must exceed m, got n={n}, m={m}")


def m_kappa(mf, s, n, m):
    """Model Laplacian ``(n - m) cot_kappa(s)``."""
    check_dimensions(n, m)
    return (n - m) * cot_kappa(mf, s)


def calibrate_symmetric(shape, delta, tol=1e-13):
    """Scale a profile symmetric about ``delta`` so that its first zero is ``delta``.

    Returns ``lam * shape`` flagged ``symmetric_about=delta``.  ``shape`` must be
    positive on [0, delta]; by Sturm comparison the first zero then decreases
    strictly in ``lam``, so the root is unique.
    """
    delta = float(delta)
    shape.check_symmetry(delta)
    mean = float(np.mean(shape(np.linspace(0.0, delta, 257))))
    if not mean > 0:
        raise ValueError("shape must be positive on [0, delta]")
    lam0 = (math.pi / delta) ** 2 / mean

    def sk_at_delta(lam):
        return solve_jacobi(shape.scaled(lam), delta, tol=tol).sk[-1]

    lam = brentq(sk_at_delta, 0.5 * lam0, 1.8 * lam0, xtol=1e-15, rtol=1e-15, maxiter=200)
    return shape.scaled(lam).with_symmetry(delta)
