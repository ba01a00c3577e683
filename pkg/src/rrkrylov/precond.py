"""Right preconditioners ``B = C A^T`` and dense materialization oracles.

Three choices of ``C`` are supported: the identity (``B = A^T``), the
inverse diagonal of ``A^T A``, and ``ell`` NR-SSOR inner iterations, i.e.
symmetric SOR sweeps over the columns of ``A`` applied to the normal
equations. The ``materialize_*`` functions build ``M``, ``C`` and ``H``
densely for verifying the theory on small matrices; the solver never calls
them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from . import kernels
from .dense import MAX_DENSE, dense_svd, dense_symmetric_eig, rank_tolerance
from .errors import ContractError, PreconditionerError, StructuralError
from .sparse import SparseMatrixCSR, column_sq_norms, matvec_transpose


class Kind(enum.Enum):
    AT = "at"
    DIAG_AT = "diag-at"
    NRSSOR = "nrssor"


def _check_omega(omega):
    if not 0.0 < omega < 2.0:
        raise PreconditionerError(f"omega must lie strictly between 0 and 2, got {omega}")


@dataclass(frozen=True, eq=False)
class RightPreconditioner:
    """Operator ``c -> C A^T c`` from ``R^m`` to ``R^n``.

    Build with :meth:`at`, :meth:`diag_at` or :meth:`nrssor`.
    """

    kind: Kind
    matrix: SparseMatrixCSR
    omega: float = 1.0
    inner_iters: int = 1
    col_sq_norms: np.ndarray = field(default=None, repr=False)
    _columns: SparseMatrixCSR = field(default=None, repr=False)

    @classmethod
    def at(cls, A):
        return cls(Kind.AT, A, col_sq_norms=column_sq_norms(A))

    @classmethod
    def diag_at(cls, A):
        sq = column_sq_norms(A)
        if np.any(sq <= 0.0):
            raise PreconditionerError(f"diag(A^T A) has zero entries (column {int(np.argmin(sq))})")
        return cls(Kind.DIAG_AT, A, col_sq_norms=sq)

    @classmethod
    def nrssor(cls, A, omega=1.0, inner_iters=1):
        _check_omega(omega)
        if inner_iters < 1:
            raise PreconditionerError("inner_iters must be >= 1")
        sq = column_sq_norms(A)
        if np.any(sq <= 0.0):
            raise PreconditionerError(f"A has a zero column (column {int(np.argmin(sq))})")
        return cls(Kind.NRSSOR, A, float(omega), int(inner_iters), sq, A.transpose())

    @classmethod
    def build(cls, kind, A, omega=1.0, inner_iters=1):
        kind = Kind(kind)
        if kind is Kind.AT:
            return cls.at(A)
        if kind is Kind.DIAG_AT:
            return cls.diag_at(A)
        return cls.nrssor(A, omega, inner_iters)

    @property
    def shape(self):
        return (self.matrix.ncols, self.matrix.nrows)

    def apply(self, c):
        c = np.ascontiguousarray(c, dtype=np.float64)
        if c.shape != (self.matrix.nrows,):
            raise StructuralError(f"preconditioner expects length {self.matrix.nrows}, got {c.shape}")
        if self.kind is Kind.AT:
            return matvec_transpose(self.matrix, c)
        if self.kind is Kind.DIAG_AT:
            return matvec_transpose(self.matrix, c) / self.col_sq_norms
        cols = self._columns
        return kernels.nrssor_sweeps(
            cols.indptr, cols.indices, cols.data, self.col_sq_norms, c, self.omega, self.inner_iters
        )

    __call__ = apply


def apply(B: RightPreconditioner, c):
    return B.apply(c)


# dense oracles -----------------------------------------------------------


def _normal_parts(A, omega):
    if A.ncols > MAX_DENSE:
        raise ContractError(f"materialization limited to n <= {MAX_DENSE}")
    _check_omega(omega)
    Ad = A.to_dense()
    AtA = Ad.T @ Ad
    d = np.diag(AtA).copy()
    if np.any(d <= 0.0):
        raise PreconditionerError("A has a zero column")
    return Ad, AtA, d


def _ssor_factor(AtA, d, omega):
    """Lower-triangular ``K`` with ``M = K K^T``."""
    lower = np.tril(AtA, -1)
    return (np.diag(d) + omega * lower) / np.sqrt(d)[None, :] / np.sqrt(omega * (2.0 - omega))


def materialize_M(A, omega):
    """``M = (D + w L) D^-1 (D + w L^T) / (w (2 - w))`` for ``A^T A = L + D + L^T``."""
    _, AtA, d = _normal_parts(A, omega)
    lower = np.tril(AtA, -1)
    DL = np.diag(d) + omega * lower
    return DL @ (DL.T / d[:, None]) / (omega * (2.0 - omega))


def _m_inverse(AtA, d, omega):
    K = _ssor_factor(AtA, d, omega)
    Kinv = solve_triangular(K, np.eye(K.shape[0]), lower=True)
    return Kinv.T @ Kinv


def materialize_C(A, omega, ell):
    """``C = sum_{i<ell} H^i M^-1`` with ``H = I - M^-1 A^T A``."""
    if ell < 1:
        raise ContractError("ell must be >= 1")
    _, AtA, d = _normal_parts(A, omega)
    Minv = _m_inverse(AtA, d, omega)
    H = np.eye(A.ncols) - Minv @ AtA
    term = Minv
    C = Minv.copy()
    for _ in range(ell - 1):
        term = H @ term
        C += term
    return C


def materialize_H(A, omega):
    _, AtA, d = _normal_parts(A, omega)
    return np.eye(A.ncols) - _m_inverse(AtA, d, omega) @ AtA


def spectral_radius_H(A, omega, rank=None):
    """Spectral radius of the NR-SSOR iteration matrix on the range of ``A^T``.

    ``H`` is similar to the symmetric ``I - K^-1 A^T A K^-T`` where
    ``M = K K^T``. When ``A`` is rank deficient, ``H`` carries the eigenvalue
    1 on ``N(A)``; those ``n - rank`` eigenvalues are excluded, which is the
    radius governing semiconvergence.
    """
    Ad, AtA, d = _normal_parts(A, omega)
    K = _ssor_factor(AtA, d, omega)
    Y = solve_triangular(K, Ad.T, lower=True)  # K^-1 A^T
    S = Y @ Y.T
    mu, _ = dense_symmetric_eig(0.5 * (S + S.T))
    if rank is None:
        s = dense_svd(Ad)[1]
        rank = int(np.sum(s > rank_tolerance(s, Ad.shape)))
    if rank == 0:
        return 0.0
    return float(np.max(np.abs(1.0 - mu[:rank])))
