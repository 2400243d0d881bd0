"""Dense SPD solves and the tiny least-squares fit used by the inverse step."""

from __future__ import annotations

import numpy as np

__all__ = [
    "NotIdentifiableError",
    "NotSPDError",
    "SymMatrix",
    "cholesky_factor",
    "cholesky_solve",
    "lsq_affine_2",
    "solve_lower",
    "solve_upper",
]


class NotSPDError(ValueError):
    """Cholesky hit a non-positive pivot; ``pivot_index`` names the row."""

    def __init__(self, pivot_index, pivot):
        super().__init__(
            f"matrix not SPD: pivot {pivot:.6g} at index {pivot_index}"
        )
        self.pivot_index = pivot_index


class NotIdentifiableError(ValueError):
    """The 2x2 normal matrix of the affine fit is singular."""


class SymMatrix:
    """Dense symmetric matrix of order ``n``.

    Symmetry is enforced at construction by mirroring the lower triangle, so
    A[i, j] == A[j, i] holds exactly.
    """

    def __init__(self, data):
        arr = np.array(data, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("expected a square matrix")
        lower = np.tril(arr)
        arr = lower + lower.T - np.diag(np.diag(arr))
        arr.flags.writeable = False
        self._array = arr

    @property
    def order(self) -> int:
        return self._array.shape[0]

    @property
    def array(self) -> np.ndarray:
        return self._array

    def __array__(self, dtype=None):
        return np.asarray(self._array, dtype=dtype)


def cholesky_factor(A) -> np.ndarray:
    """Lower-triangular L with L L^T = A; no pivoting (A must be SPD)."""
    M = np.asarray(A, dtype=float)
    n = M.shape[0]
    L = np.zeros_like(M)
    for k in range(n):
        d = M[k, k] - L[k, :k] @ L[k, :k]
        if d <= 0.0:
            raise NotSPDError(k, d)
        L[k, k] = np.sqrt(d)
        if k + 1 < n:
            L[k + 1 :, k] = (M[k + 1 :, k] - L[k + 1 :, :k] @ L[k, :k]) / L[k, k]
    return L


def solve_lower(L: np.ndarray, b):
    """Forward substitution; ``b`` may be a vector or a matrix of columns."""
    y = np.array(b, dtype=float)
    for k in range(L.shape[0]):
        y[k] = (y[k] - L[k, :k] @ y[:k]) / L[k, k]
    return y


def solve_upper(U: np.ndarray, b):
    """Back substitution for an upper-triangular U."""
    y = np.array(b, dtype=float)
    for k in range(U.shape[0] - 1, -1, -1):
        y[k] = (y[k] - U[k, k + 1 :] @ y[k + 1 :]) / U[k, k]
    return y


def cholesky_solve(A, b) -> np.ndarray:
    """Solve A x = b for SPD A."""
    L = cholesky_factor(A)
    return solve_upper(L.T, solve_lower(L, b))


def lsq_affine_2(rows):
    """Unconstrained minimiser (a, b) of sum_k (r0_k + a p_k + b q_k)^2.

    ``rows`` is a sequence of (r0, p, q) triples; solved in closed form via
    the 2x2 normal equations.  Raises :class:`NotIdentifiableError` when the
    normal matrix is singular (e.g. all p and q zero).
    """
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError("expected rows of (r0, p, q) triples")
    if arr.shape[0] < 2:
        raise ValueError("need at least 2 rows")
    r0, p, q = arr[:, 0], arr[:, 1], arr[:, 2]
    spp = p @ p
    spq = p @ q
    sqq = q @ q
    det = spp * sqq - spq * spq
    scale = max(spp, sqq)
    if det <= 1e-14 * scale * scale:
        raise NotIdentifiableError("lambda not identifiable: singular normal matrix")
    rp = -(r0 @ p)
    rq = -(r0 @ q)
    a = (sqq * rp - spq * rq) / det
    b = (spp * rq - spq * rp) / det
    return a, b
