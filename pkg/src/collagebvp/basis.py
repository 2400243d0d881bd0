"""The Haar system on [0, 1] and its integrated (tent) counterpart.

Indexing is 1-based.  h_1 = 1 and, for k >= 2 with the unique decomposition
k = 2**j + i (j >= 0, 1 <= i <= 2**j), h_k takes the values +2**(j/2) and
-2**(j/2) on the two halves of [(i-1)/2**j, i/2**j] and vanishes elsewhere.
This L2 normalisation makes {h_k} orthonormal.

The second family integrates the first: g_1 = 1 and
g_k(x) = integral of h_{k-1} over [0, x] for k >= 2, so g_2(x) = x and every
g_k with k >= 3 is a tent supported on a dyadic interval with
g_k(0) = g_k(1) = 0.  {g_k : k >= 1} is a Schauder basis of H1(0,1) and
{g_{k+2} : k >= 1} one of H1_0(0,1); the stiffness Gram of the latter is the
identity because g_k' = h_{k-1}.

Step values at dyadic jump points follow the right-limit convention, with the
left limit at x = 1.  The choice is invisible to every integral.
"""

from __future__ import annotations

import operator
from functools import lru_cache

import numpy as np

from .quadrature import QuadratureRule, dyadic_breakpoints, integrate, sample

__all__ = [
    "h1_gram",
    "haar_breakpoints",
    "haar_eval",
    "haar_index",
    "load_entry",
    "load_vector",
    "mass_entry",
    "mass_matrix",
    "schauder_breakpoints",
    "schauder_deriv",
    "schauder_eval",
    "schauder_matrix",
    "schauder_support",
    "stiffness_entry",
]


def haar_index(k: int) -> tuple[int, int]:
    """Level and shift (j, i) with k = 2**j + i and 1 <= i <= 2**j."""
    k = operator.index(k)
    if k < 2:
        raise ValueError("decomposition requires k >= 2")
    j = (k - 1).bit_length() - 1
    return j, k - 2**j


def _check_unit_interval(x):
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("argument outside [0, 1]")
    return arr


def haar_eval(k: int, x):
    """Value of h_k at x (scalar or array)."""
    if k < 1:
        raise ValueError("Haar index must be >= 1")
    arr = _check_unit_interval(x)
    if k == 1:
        out = np.ones_like(arr)
    else:
        j, i = haar_index(k)
        amp = 2.0 ** (0.5 * j)
        u = arr * 2**j - (i - 1)
        out = np.where((u >= 0.0) & (u < 0.5), amp, 0.0)
        out = out + np.where((u >= 0.5) & (u < 1.0), -amp, 0.0)
        if i == 2**j:
            # left limit at the right edge of the domain
            out = np.where(arr == 1.0, -amp, out)
    return float(out) if np.ndim(x) == 0 else out


def haar_breakpoints(k: int) -> np.ndarray:
    """Jump locations of h_k (support endpoints and midpoint for k >= 2)."""
    if k < 1:
        raise ValueError("Haar index must be >= 1")
    if k == 1:
        return np.array([0.0, 1.0])
    j, i = haar_index(k)
    half = 2.0 ** -(j + 1)
    a = (i - 1) * 2.0**-j
    return np.array([a, a + half, a + 2 * half])


def schauder_support(k: int) -> tuple[float, float]:
    """Closed support interval of g_k."""
    if k < 1:
        raise ValueError("index must be >= 1")
    if k <= 2:
        return 0.0, 1.0
    j, i = haar_index(k - 1)
    return (i - 1) * 2.0**-j, i * 2.0**-j


def schauder_eval(k: int, x):
    """Value of g_k at x; exact closed form, no quadrature involved."""
    if k < 1:
        raise ValueError("index must be >= 1")
    arr = _check_unit_interval(x)
    if k == 1:
        out = np.ones_like(arr)
    elif k == 2:
        out = arr + 0.0
    else:
        j, i = haar_index(k - 1)
        half = 2.0 ** -(j + 1)
        centre = (i - 1) * 2.0**-j + half
        peak = 2.0 ** (-0.5 * j - 1)
        out = peak * np.maximum(0.0, 1.0 - np.abs(arr - centre) / half)
    return float(out) if np.ndim(x) == 0 else out


def schauder_deriv(k: int, x):
    """Derivative of g_k: h_{k-1} for k >= 2, zero for the constant g_1."""
    if k < 1:
        raise ValueError("index must be >= 1")
    if k == 1:
        arr = _check_unit_interval(x)
        return 0.0 if np.ndim(x) == 0 else np.zeros_like(arr)
    return haar_eval(k - 1, x)


def schauder_breakpoints(k: int) -> np.ndarray:
    """Kink locations of g_k."""
    if k < 1:
        raise ValueError("index must be >= 1")
    if k <= 2:
        return np.array([0.0, 1.0])
    return haar_breakpoints(k - 1)


def schauder_matrix(ks, x) -> np.ndarray:
    """Matrix with columns g_k(x) for k in ``ks``."""
    arr = np.asarray(x, dtype=float)
    return np.column_stack([schauder_eval(k, arr) for k in ks])


def stiffness_entry(p: int, q: int) -> float:
    """Integral of g_p' g_q'; the Kronecker delta, by step orthonormality."""
    if p < 2 or q < 2:
        raise ValueError("stiffness entries are defined for indices >= 2")
    return 1.0 if p == q else 0.0


def mass_entry(p: int, q: int) -> float:
    """Exact integral of g_p g_q for H1_0 members (p, q >= 3).

    The product is quadratic between adjacent kinks, so one Simpson
    evaluation per cell of the merged kink grid is exact.
    """
    if p < 3 or q < 3:
        raise ValueError("mass entries are defined for H1_0 indices p, q >= 3")
    ap, bp = schauder_support(p)
    aq, bq = schauder_support(q)
    lo, hi = max(ap, aq), min(bp, bq)
    if lo >= hi:
        return 0.0
    pts = np.unique(
        np.concatenate([[lo, hi], schauder_breakpoints(p), schauder_breakpoints(q)])
    )
    pts = pts[(pts >= lo) & (pts <= hi)]
    a, b = pts[:-1], pts[1:]
    mid = 0.5 * (a + b)

    def prod(t):
        return schauder_eval(p, t) * schauder_eval(q, t)

    return float(np.sum((b - a) / 6.0 * (prod(a) + 4.0 * prod(mid) + prod(b))))


@lru_cache(maxsize=None)
def mass_matrix(m: int) -> np.ndarray:
    """L2 Gram matrix of {g_3, ..., g_{m+2}} (exact, cached, read-only)."""
    if m < 1:
        raise ValueError("dimension must be >= 1")
    M = np.zeros((m, m))
    for a in range(m):
        for b in range(a, m):
            value = mass_entry(a + 3, b + 3)
            M[a, b] = value
            M[b, a] = value
    M.flags.writeable = False
    return M


def h1_gram(n: int) -> np.ndarray:
    """H1 Gram of {g_3, ..., g_{n+2}}: identity stiffness plus mass."""
    return np.eye(n) + mass_matrix(n)


def load_entry(w, k: int, rule: QuadratureRule) -> float:
    """Integral of w(x) g_k(x), splitting the rule at the kinks of g_k."""
    merged = np.unique(np.concatenate([rule.breakpoints, schauder_breakpoints(k)]))
    split = QuadratureRule(points=rule.points, breakpoints=merged, refine=rule.refine)
    return integrate(lambda t: sample(w, t) * schauder_eval(k, t), split)


def load_vector(w, count: int, rule: QuadratureRule) -> np.ndarray:
    """Integrals of w against g_3, ..., g_{count+2} in a single pass."""
    if count < 1:
        raise ValueError("count must be >= 1")
    level = haar_index(count + 1)[0] + 1  # finest kink level among the tents
    merged = np.unique(np.concatenate([rule.breakpoints, dyadic_breakpoints(level)]))
    split = QuadratureRule(points=rule.points, breakpoints=merged, refine=rule.refine)
    x, wt = split.nodes_weights
    weighted = wt * sample(w, x)
    return schauder_matrix(range(3, count + 3), x).T @ weighted
