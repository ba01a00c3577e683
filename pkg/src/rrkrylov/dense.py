"""Small dense linear-algebra oracles (desk scale, n <= 512)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .hessenberg import HessenbergFactorization

MAX_DENSE = 512
EPS = 2.0**-52


def _square(S, what):
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ContractError(f"{what}: expected a square matrix, got shape {S.shape}")
    return S


def _cap(M, what):
    if max(M.shape) > MAX_DENSE:
        raise ContractError(f"{what}: size {M.shape} exceeds dense cap {MAX_DENSE}")


def dense_symmetric_eig(S):
    """Eigen-decomposition of a symmetric matrix, eigenvalues descending."""
    S = _square(S, "dense_symmetric_eig")
    _cap(S, "dense_symmetric_eig")
    scale = np.abs(S).max() if S.size else 0.0
    if np.abs(S - S.T).max(initial=0.0) > 1e-12 * scale:
        raise ContractError("dense_symmetric_eig: matrix is not symmetric")
    w, V = np.linalg.eigh(S)
    order = np.argsort(w)[::-1]
    return w[order], V[:, order]


def dense_svd(M):
    """Thin SVD ``M = U diag(s) V^T`` with ``s`` descending."""
    M = np.asarray(M, dtype=float)
    _cap(M, "dense_svd")
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    return U, s, Vt.T


def rank_tolerance(s, shape):
    """Default numerical-rank threshold ``max(m, n) * eps * sigma_1``."""
    return max(shape) * EPS * (s[0] if len(s) else 0.0)


@dataclass(frozen=True)
class CholeskyFailure:
    """Reported when a pivot is not positive; ``pivot`` is 1-based."""

    pivot: int
    value: float

    def __bool__(self):
        return False


def cholesky(S):
    """Lower-triangular ``L`` with ``L L^T = S``, or a :class:`CholeskyFailure`.

    Written out by hand (rather than delegating) so that an indefinite input
    reports which pivot failed instead of raising.
    """
    S = _square(S, "cholesky")
    n = S.shape[0]
    L = np.zeros_like(S)
    for j in range(n):
        d = S[j, j] - L[j, :j] @ L[j, :j]
        if not d > 0.0:
            return CholeskyFailure(j + 1, float(d))
        L[j, j] = np.sqrt(d)
        L[j + 1 :, j] = (S[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
    return L


def hessenberg_least_squares(H, g):
    """Solve ``min ||H y - g||`` for a ``(k+1) x k`` Hessenberg ``H`` by Givens rotations.

    Returns ``(y, residual_norm)``. The residual is the magnitude of the last
    rotated right-hand side entry, or ``||H y - g||`` directly when a zero
    pivot made the rotated value meaningless.
    """
    H = np.asarray(H, dtype=float)
    g = np.asarray(g, dtype=float)
    kp1, k = H.shape
    if kp1 != k + 1 or g.shape != (kp1,):
        raise ContractError("hessenberg_least_squares: expected H of shape (k+1, k) and g of length k+1")
    if np.any(np.tril(H, -2)):
        raise ContractError("hessenberg_least_squares: H is not upper Hessenberg")
    fact = HessenbergFactorization(k, g[0])
    for j in range(k):
        fact.add_column(H[: j + 2, j], g[j + 1])
    y = fact.solve()
    if fact.singular():
        return y, fact.direct_residual(y)
    return y, fact.residual_norm
