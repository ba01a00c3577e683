"""Incremental Givens QR of an upper Hessenberg least-squares problem."""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import solve_triangular


def _givens(a, b):
    """Return ``(c, s, rho)`` with ``[c s; -s c] @ [a, b] = [rho, 0]``."""
    if b == 0.0:
        return (1.0, 0.0, a) if a >= 0.0 else (-1.0, 0.0, -a)
    rho = math.hypot(a, b)
    return a / rho, b / rho, rho


class HessenbergFactorization:
    """Growing ``(k+1) x k`` Hessenberg matrix with its Givens-reduced form.

    Columns are appended one at a time together with the next right-hand side
    entry; the rotated right-hand side is kept current so the residual of
    ``min ||H y - g||`` is available after every column.
    """

    def __init__(self, capacity, g1=0.0):
        self.capacity = capacity
        self.k = 0
        self.H = np.zeros((capacity + 1, capacity))
        self.R = np.zeros((capacity + 1, capacity))
        self.cs = np.zeros(capacity)
        self.sn = np.zeros(capacity)
        self.g = np.zeros(capacity + 1)
        self.grot = np.zeros(capacity + 1)
        self.g[0] = self.grot[0] = g1

    def add_column(self, h, g_next):
        """Append column ``h`` (length ``k+2``) and right-hand side entry ``g_next``."""
        j = self.k
        if j >= self.capacity:
            self._grow(max(2 * self.capacity, 1))
        h = np.asarray(h, dtype=float)
        self.H[: j + 2, j] = h
        col = h.copy()
        for i in range(j):
            c, s = self.cs[i], self.sn[i]
            col[i], col[i + 1] = c * col[i] + s * col[i + 1], -s * col[i] + c * col[i + 1]
        c, s, rho = _givens(col[j], col[j + 1])
        self.cs[j], self.sn[j] = c, s
        col[j], col[j + 1] = rho, 0.0
        self.R[: j + 2, j] = col
        self.g[j + 1] = g_next
        a, b = self.grot[j], g_next
        self.grot[j], self.grot[j + 1] = c * a + s * b, -s * a + c * b
        self.k = j + 1

    def _grow(self, capacity):
        for name in ("H", "R"):
            old = getattr(self, name)
            new = np.zeros((capacity + 1, capacity))
            new[: old.shape[0], : old.shape[1]] = old
            setattr(self, name, new)
        for name in ("cs", "sn", "g", "grot"):
            old = getattr(self, name)
            new = np.zeros(capacity + (name in ("g", "grot")))
            new[: old.size] = old
            setattr(self, name, new)
        self.capacity = capacity

    @property
    def residual_norm(self):
        """``min_y ||H y - g||`` for the current ``k``."""
        return float(abs(self.grot[self.k]))

    def _pivot_threshold(self, pivot_tol):
        return pivot_tol * np.linalg.norm(self.H[: self.k + 1, : self.k])

    def singular(self, pivot_tol=1e-14):
        """True when some pivot of the reduced system is numerically zero."""
        d = np.abs(np.diag(self.R[: self.k, : self.k]))
        return bool(np.any(d <= self._pivot_threshold(pivot_tol)))

    def solve(self, pivot_tol=1e-14):
        """Back-substitute the reduced triangular system.

        A pivot at or below ``pivot_tol * ||H||`` yields a zero solution
        component (minimum-norm completion of the rank-deficient case).
        """
        k = self.k
        R = self.R[:k, :k]
        rhs = self.grot[:k]
        thresh = self._pivot_threshold(pivot_tol)
        if k and np.all(np.abs(np.diag(R)) > thresh):
            return solve_triangular(R, rhs, lower=False, check_finite=False)
        y = np.zeros(k)
        for i in range(k - 1, -1, -1):
            piv = R[i, i]
            if abs(piv) <= thresh:
                continue
            y[i] = (rhs[i] - R[i, i + 1 : k] @ y[i + 1 : k]) / piv
        return y

    def direct_residual(self, y):
        """``||H y - g||`` evaluated on the un-rotated data."""
        k = self.k
        return float(np.linalg.norm(self.H[: k + 1, :k] @ y - self.g[: k + 1]))

    def hessenberg(self):
        """Un-rotated ``(k+1) x k`` Hessenberg matrix."""
        return self.H[: self.k + 1, : self.k].copy()
