"""Convergence diagnostics, theory checks and history export."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import structural_rank as _structural_rank

from .dense import MAX_DENSE, dense_svd, dense_symmetric_eig, rank_tolerance
from .errors import ContractError, DegenerateInputError, StructuralError
from .precond import materialize_C, spectral_radius_H
from .sparse import SparseMatrixCSR, matvec, matvec_transpose

CSV_HEADER = ("iteration", "res_norm", "ne_res_rel", "elapsed_sec")


@dataclass
class ConvergenceHistory:
    """Per-iteration record of a Krylov solve.

    ``ls_residual`` and ``complement_norm`` hold the two terms of the
    residual split (small least-squares residual and the part of ``r0``
    orthogonal to the Krylov basis); they are not exported to CSV.
    """

    iterations: list = field(default_factory=list)
    res_norms: list = field(default_factory=list)
    ne_ratios: list = field(default_factory=list)
    elapsed: list = field(default_factory=list)
    ls_residual: list = field(default_factory=list)
    complement_norm: list = field(default_factory=list)

    def append(self, k, res_norm, ne_ratio, elapsed, ls_residual=float("nan"), complement_norm=float("nan")):
        if self.iterations and k <= self.iterations[-1]:
            raise ContractError("iteration numbers must increase")
        self.iterations.append(int(k))
        self.res_norms.append(float(res_norm))
        self.ne_ratios.append(float(ne_ratio))
        self.elapsed.append(float(elapsed))
        self.ls_residual.append(float(ls_residual))
        self.complement_norm.append(float(complement_norm))

    def __len__(self):
        return len(self.iterations)

    @property
    def min_ne(self):
        """``(min NE ratio, iteration where it is attained)``; first occurrence wins."""
        if not self.ne_ratios:
            return float("nan"), 0
        i = int(np.argmin(self.ne_ratios))
        return self.ne_ratios[i], self.iterations[i]

    def rows(self):
        return zip(self.iterations, self.res_norms, self.ne_ratios, self.elapsed)


def export_history_csv(h: ConvergenceHistory, path, timing=True):
    """Write ``iteration,res_norm,ne_res_rel,elapsed_sec`` rows.

    With ``timing=False`` the elapsed column is written as zeros so that
    repeated runs produce byte-identical files.
    """
    if not len(h):
        raise ContractError("cannot export an empty history")
    path = Path(path)
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for k, res, ne, t in h.rows():
                w.writerow((k, f"{res:.17g}", f"{ne:.17g}", f"{t if timing else 0.0:.17g}"))
    except OSError as exc:
        raise OSError(f"cannot write history to {path}: {exc}") from exc


def read_history_csv(path) -> ConvergenceHistory:
    h = ConvergenceHistory()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        for row in reader:
            h.append(int(row[0]), float(row[1]), float(row[2]), float(row[3]))
    return h


def ne_residual_ratio(A: SparseMatrixCSR, b, x):
    """``||A^T (b - A x)|| / ||A^T b||``."""
    b = np.asarray(b, dtype=float)
    denom = np.linalg.norm(matvec_transpose(A, b))
    if denom == 0.0:
        raise DegenerateInputError("A^T b = 0; the ratio is undefined")
    r = b - matvec(A, x)
    return float(np.linalg.norm(matvec_transpose(A, r)) / denom)


def _dense(A, what, cap=MAX_DENSE):
    if min(A.shape) > cap or max(A.shape) > 4 * cap:
        raise ContractError(f"{what}: {A.shape} exceeds the dense size cap")
    return A.to_dense()


def singular_values(A: SparseMatrixCSR):
    return dense_svd(_dense(A, "singular_values"))[1]


def numerical_rank(A: SparseMatrixCSR, tol=None):
    """Count singular values above ``tol`` (default ``max(m, n) * eps * sigma_1``)."""
    s = singular_values(A)
    if tol is None:
        tol = rank_tolerance(s, A.shape)
    return int(np.sum(s > tol))


def structural_rank(A: SparseMatrixCSR):
    """Rank of the sparsity pattern (maximum bipartite matching); exact-arithmetic upper bound."""
    S = csr_matrix((A.data, A.indices, A.indptr), shape=A.shape)
    return int(_structural_rank(S))


def condition_number(A: SparseMatrixCSR, tol=None):
    """``sigma_1 / sigma_r`` over the numerically nonzero singular values."""
    s = singular_values(A)
    if tol is None:
        tol = rank_tolerance(s, A.shape)
    r = int(np.sum(s > tol))
    return float(s[0] / s[r - 1]) if r else float("inf")


def nullspace_basis(A: SparseMatrixCSR, tol=None):
    Ad = _dense(A, "nullspace_basis")
    _, s, V = np.linalg.svd(Ad, full_matrices=True)
    if tol is None:
        tol = rank_tolerance(s, Ad.shape)
    r = int(np.sum(s > tol))
    return V.T[:, r:]


def nullspace_component(A: SparseMatrixCSR, x, tol=None):
    """``||P_N(A) x||`` from an orthonormal nullspace basis."""
    x = np.asarray(x, dtype=float)
    if x.shape != (A.ncols,):
        raise StructuralError("x must have length ncols")
    N = nullspace_basis(A, tol)
    return float(np.linalg.norm(N.T @ x)) if N.size else 0.0


def lstsq_min_norm(A: SparseMatrixCSR, b, tol=None):
    """Minimum-norm least-squares solution via the dense pseudoinverse."""
    U, s, V = dense_svd(_dense(A, "lstsq_min_norm"))
    if tol is None:
        tol = rank_tolerance(s, A.shape)
    r = int(np.sum(s > tol))
    return V[:, :r] @ ((U[:, :r].T @ np.asarray(b, dtype=float)) / s[:r])


@dataclass
class SpectralReport:
    """Eigenvalue census of ``G = A C A^T`` against the clustering interval."""

    rank: int
    rho_H: float
    ell: int
    interval: tuple
    n_clustered: int
    n_zero: int
    n_outside: int
    max_zero_abs: float
    lambda_max: float
    asymmetry: float
    eigenvalues: np.ndarray = field(repr=False)
    shared_spectrum_err: float = float("nan")

    @property
    def size(self):
        return self.n_clustered + self.n_zero + self.n_outside

    @property
    def passed(self):
        return self.n_clustered == self.rank and self.n_zero == self.size - self.rank and self.n_outside == 0


def verify_clustering(A: SparseMatrixCSR, omega, ell, slack=1e-8, zero_tol=1e-8, rank=None):
    """Check that ``A C^(ell) A^T`` has ``rank`` eigenvalues near 1 and the rest at 0.

    The ``rank`` largest eigenvalues must lie in ``[1 - rho^ell, 1]`` for even
    ``ell`` and ``[1 - rho^ell, 1 + rho^ell]`` for odd ``ell`` (widened by
    ``slack``); the others must satisfy ``|lambda| <= zero_tol * lambda_max``.
    Also records how far the nonzero spectra of ``A C A^T`` and ``C A^T A``
    differ, relative to ``lambda_max``.
    """
    if max(A.shape) > 256:
        raise ContractError("verify_clustering is limited to m, n <= 256")
    Ad = A.to_dense()
    if rank is None:
        rank = numerical_rank(A)
    rho = spectral_radius_H(A, omega, rank=rank)
    C = materialize_C(A, omega, ell)
    G = Ad @ C @ Ad.T
    scale = np.abs(G).max()
    asym = float(np.abs(G - G.T).max() / scale) if scale else 0.0
    lam, _ = dense_symmetric_eig(0.5 * (G + G.T))
    lam_max = float(np.max(np.abs(lam))) if lam.size else 0.0
    rl = rho**ell
    lo = 1.0 - rl
    hi = 1.0 + (rl if ell % 2 else 0.0)
    # lam is sorted descending: the leading `rank` values are the ones the
    # clustering bound places in the interval, the rest must vanish.
    top, rest = lam[:rank], lam[rank:]
    inside = (top >= lo - slack) & (top <= hi + slack)
    zero = np.abs(rest) <= zero_tol * lam_max

    # nonzero spectrum of the unsymmetric n x n product, compared on the
    # scale of lambda_max (tiny eigenvalues carry only absolute accuracy)
    other = np.linalg.eigvals(C @ (Ad.T @ Ad))
    other = np.sort(other.real[np.argsort(-np.abs(other))[:rank]])[::-1]
    shared = float(np.max(np.abs(other - top)) / lam_max) if rank and lam_max else 0.0

    return SpectralReport(
        rank=rank,
        rho_H=rho,
        ell=ell,
        interval=(lo, hi),
        n_clustered=int(inside.sum()),
        n_zero=int(zero.sum()),
        n_outside=int((~inside).sum() + (~zero).sum()),
        max_zero_abs=float(np.abs(rest).max()) if rest.size else 0.0,
        lambda_max=lam_max,
        asymmetry=asym,
        eigenvalues=lam,
        shared_spectrum_err=shared,
    )
