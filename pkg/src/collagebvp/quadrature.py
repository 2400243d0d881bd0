"""Composite Gauss-Legendre quadrature on [0, 1] honouring breakpoints.

Every integral involving a non-polynomial factor goes through
:func:`integrate`.  A rule carries an explicit breakpoint list so that no
quadrature cell ever straddles a kink of a piecewise-linear basis function.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

__all__ = [
    "MAX_GAUSS_POINTS",
    "QuadratureRule",
    "default_rule",
    "dyadic_breakpoints",
    "gauss_nodes",
    "integrate",
    "sample",
]

MAX_GAUSS_POINTS = 16


def _legendre(p, x):
    # Returns (P_p(x), P_p'(x)) for p >= 2 via the three-term recurrence.
    prev = np.ones_like(x)
    cur = np.array(x, dtype=float)
    for n in range(2, p + 1):
        prev, cur = cur, ((2 * n - 1) * x * cur - (n - 1) * prev) / n
    deriv = p * (x * cur - prev) / (x * x - 1.0)
    return cur, deriv


@lru_cache(maxsize=None)
def gauss_nodes(p: int):
    """Gauss-Legendre nodes and weights on [-1, 1].

    Nodes are the roots of the degree-``p`` Legendre polynomial, located by
    Newton iteration from the Chebyshev initial guess and polished to 1e-15;
    the weights sum to 2.
    """
    if not 1 <= p <= MAX_GAUSS_POINTS:
        raise ValueError(f"points per cell must be in 1..{MAX_GAUSS_POINTS}, got {p}")
    if p == 1:
        nodes = np.zeros(1)
        weights = np.full(1, 2.0)
    else:
        k = np.arange(1, p + 1)
        x = np.cos(np.pi * (k - 0.25) / (p + 0.5))
        for _ in range(60):
            value, deriv = _legendre(p, x)
            step = value / deriv
            x = x - step
            if np.max(np.abs(step)) < 1e-15:
                break
        value, deriv = _legendre(p, x)
        x = x - value / deriv
        nodes = np.sort(x)
        nodes = 0.5 * (nodes - nodes[::-1])  # enforce symmetry exactly
        _, deriv = _legendre(p, nodes)
        weights = 2.0 / ((1.0 - nodes**2) * deriv**2)
        weights = 0.5 * (weights + weights[::-1])
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


@dataclass(frozen=True)
class QuadratureRule:
    """`points`-node Gauss rule per cell; cells come from ``breakpoints``,
    each split into ``2**refine`` uniform parts.

    Exact for polynomials of degree ``2*points - 1`` on every cell.
    """

    points: int = 8
    breakpoints: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0]))
    refine: int = 0

    def __post_init__(self):
        gauss_nodes(self.points)  # validates the range of `points`
        bp = np.asarray(self.breakpoints, dtype=float)
        if bp.ndim != 1 or bp.size < 2:
            raise ValueError("breakpoints must be a 1-D list containing 0 and 1")
        if bp[0] != 0.0 or bp[-1] != 1.0:
            raise ValueError("breakpoints must start at 0 and end at 1")
        if np.any(np.diff(bp) <= 0.0):
            raise ValueError("breakpoints must be strictly increasing")
        if self.refine < 0:
            raise ValueError("refine must be >= 0")
        bp = bp.copy()
        bp.flags.writeable = False
        object.__setattr__(self, "breakpoints", bp)

    @cached_property
    def nodes_weights(self):
        """All mapped nodes and weights, flattened over cells."""
        lo = self.breakpoints[:-1]
        hi = self.breakpoints[1:]
        if self.refine:
            parts = 2**self.refine
            t = np.arange(parts) / parts
            width = hi - lo
            lo2 = (lo[:, None] + width[:, None] * t[None, :]).ravel()
            hi2 = (lo[:, None] + width[:, None] * (t + 1.0 / parts)[None, :]).ravel()
            lo, hi = lo2, hi2
        gx, gw = gauss_nodes(self.points)
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        x = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
        w = (half[:, None] * gw[None, :]).ravel()
        x.flags.writeable = False
        w.flags.writeable = False
        return x, w


def sample(fn, x: np.ndarray) -> np.ndarray:
    """Evaluate ``fn`` at the points ``x``, tolerating scalar-only callables."""
    try:
        y = np.asarray(fn(x), dtype=float)
    except (TypeError, ValueError):
        return np.array([float(fn(t)) for t in x])
    if y.shape == x.shape:
        return y
    if y.ndim == 0:
        return np.full(x.shape, float(y))
    return np.array([float(fn(t)) for t in x])


def integrate(w, rule: QuadratureRule) -> float:
    """Composite quadrature of ``w`` over [0, 1]."""
    x, wt = rule.nodes_weights
    return float(np.dot(wt, sample(w, x)))


def dyadic_breakpoints(level: int) -> np.ndarray:
    """The uniform dyadic grid {k / 2**level}."""
    if level < 0:
        raise ValueError("level must be >= 0")
    return np.arange(2**level + 1) / 2**level


def default_rule(m: int, points: int = 8, refine: int = 2) -> QuadratureRule:
    """Overkill rule for a dimension-``m`` tent-basis computation.

    Breakpoints sit on the dyadic grid one level below the finest kink of
    g_{m+2}, so every integrand that is piecewise smooth between kinks is
    resolved; accuracy is limited by the integrand, not the rule.
    """
    level = (m + 1).bit_length() + 1  # ceil(log2(m + 2)) + 1
    return QuadratureRule(points=points, breakpoints=dyadic_breakpoints(level), refine=refine)
