"""Cumulative Gauss-Legendre tables and small numerical helpers."""
import math

import numpy as np
from scipy.special import gammaln

from .errors import NumericalFailure, OutOfDomain

_X16, _W16 = np.polynomial.legendre.leggauss(16)
_X8, _W8 = np.polynomial.legendre.leggauss(8)


def sphere_area(n):
    """Area of the unit sphere S^{n-1} in R^n, i.e. 2 pi^{n/2} / Gamma(n/2)."""
    return math.exp(math.log(2.0) + 0.5 * n * math.log(math.pi) - gammaln(0.5 * n))


def table_nodes(extent, size=4096, near_pole=0.125):
    """Nodes on [0, extent]: geometric refinement near 0, then uniform.

    A fraction ``near_pole`` of the nodes is spent on a geometric ladder from
    ``1e-7 * extent`` to ``1e-2 * extent``.
    """
    n_geo = max(int(size * near_pole), 8)
    n_lin = max(size - n_geo, 16)
    geo = np.geomspace(1e-7, 1e-2, n_geo, endpoint=False)
    lin = np.linspace(1e-2, 1.0, n_lin)
    return extent * np.concatenate(([0.0], geo, lin))


def _gl(func, a, b, x, w):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    pts = mid[..., None] + half[..., None] * x
    vals = np.asarray(func(pts.ravel()), dtype=float).reshape(pts.shape)
    return half * (vals @ w)


def gauss_legendre(func, a, b):
    """16-point Gauss-Legendre rule on each interval [a_i, b_i] (vectorized)."""
    return _gl(func, a, b, _X16, _W16)


class CumulativeIntegral:
    """Monotone-grid table of F(x) = int_{x0}^x g(t) dt.

    Each cell is integrated with a 16-point Gauss-Legendre rule and checked
    against the 8-point rule; cells that disagree are bisected until they meet
    ``rtol`` (relative to the total absolute mass).  Evaluation between nodes
    adds a Gauss-Legendre integral over the partial cell.
    """

    def __init__(self, func, nodes, rtol=1e-13, max_rounds=40):
        self.func = func
        nodes = np.unique(np.asarray(nodes, dtype=float))
        if nodes.size < 2:
            raise ValueError("need at least two nodes")
        for _ in range(max_rounds):
            a, b = nodes[:-1], nodes[1:]
            i16 = _gl(func, a, b, _X16, _W16)
            i8 = _gl(func, a, b, _X8, _W8)
            if not np.all(np.isfinite(i16)):
                raise NumericalFailure("non-finite integrand in cumulative quadrature")
            scale = max(np.abs(i16).sum(), 1e-300)
            bad = np.abs(i16 - i8) > rtol * np.maximum(np.abs(i16), 1e-3 * scale)
            if not bad.any():
                break
            nodes = np.sort(np.concatenate((nodes, 0.5 * (a[bad] + b[bad]))))
        else:
            raise NumericalFailure("cumulative quadrature did not converge")
        self.nodes = nodes
        self.cells = i16
        self.table = np.concatenate(([0.0], np.cumsum(i16)))

    @property
    def lo(self):
        return self.nodes[0]

    @property
    def hi(self):
        return self.nodes[-1]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < self.lo) or np.any(x > self.hi) or np.any(np.isnan(x)):
            raise OutOfDomain(f"argument outside table range [{self.lo}, {self.hi}]")
        k = np.clip(np.searchsorted(self.nodes, x, side="right") - 1, 0, self.nodes.size - 2)
        left = self.nodes[k]
        out = self.table[k] + _gl(self.func, left, x, _X16, _W16)
        return out if out.ndim else float(out)
