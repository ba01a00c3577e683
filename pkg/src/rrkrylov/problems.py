"""Test-problem generators.

Random draws use numpy's ``PCG64`` bit generator seeded with the given
integer. ``Generator.random`` maps each 64-bit output to ``[0, 1)`` with 53
bits, so vectors are bit-identical across platforms for a fixed seed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ContractError, DegenerateInputError
from .sparse import SparseMatrixCSR, compact, from_coordinates, from_dense, matvec, read_matrix_market


def rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def uniform_vector(n, seed):
    """``n`` i.i.d. uniform draws on ``[0, 1)``."""
    if n < 1:
        raise ContractError("n must be >= 1")
    return rng(seed).random(n)


def jordan_block(k, lam):
    if k < 1:
        raise ContractError("Jordan block size must be >= 1")
    return lam * np.eye(k) + np.eye(k, k, 1)


def gp_alphas(rho):
    a1, a16 = 1.0, 10.0**-rho
    j = np.arange(1, 17)
    alpha = a16 + (16 - j) / 15 * (a1 - a16) * 0.7 ** (j - 1)
    alpha[0], alpha[-1] = a1, a16
    return alpha


def gp_betas(gamma):
    b1, b32 = 1.0, 10.0**-gamma
    i = np.arange(1, 33)
    beta = b32 + (32 - i) / 31 * (b1 - b32) * 0.2 ** (i - 1)
    beta[0], beta[-1] = b1, b32
    return beta


def _blockdiag_j2(diag):
    k = 2 * len(diag)
    out = np.zeros((k, k))
    for t, lam in enumerate(diag):
        out[2 * t : 2 * t + 2, 2 * t : 2 * t + 2] = jordan_block(2, lam)
    return out


def _upper_blocks(rho, gamma):
    alpha, beta = gp_alphas(rho), gp_betas(gamma)
    A11 = np.zeros((64, 64))
    A11[:32, :32] = _blockdiag_j2(alpha)
    A11[32:, 32:] = np.diag(beta)
    A12 = _blockdiag_j2(beta)
    return A11, A12


def gp_matrix_dense(rho=12.0, gamma=12.0):
    A11, A12 = _upper_blocks(rho, gamma)
    A = np.zeros((128, 128))
    A[:64, :64] = A11
    A[:64, 64:] = A12
    return A


def gp_matrix(rho=12.0, gamma=12.0) -> SparseMatrixCSR:
    """128 x 128 group (index-1) matrix ``[[A11, A12], [0, 0]]``."""
    return from_dense(gp_matrix_dense(rho, gamma))


def index2_matrix_dense(rho=12.0, gamma=15.0):
    A = gp_matrix_dense(rho, gamma)
    for i in range(1, 17):
        A[64 + 2 * i - 2, 64 + 2 * i - 1] = 1.0
    return A


def index2_matrix(rho=12.0, gamma=15.0) -> SparseMatrixCSR:
    """128 x 128 index-2 matrix ``[[A11, A12], [0, A22]]``; ``A22`` holds 16 unit entries."""
    return from_dense(index2_matrix_dense(rho, gamma))


def make_rhs_inconsistent(A: SparseMatrixCSR, noise=0.01, seed=0):
    """``A 1 / ||A 1|| + noise * u / ||u||`` with ``u`` uniform on ``[0, 1)^m``."""
    if noise < 0:
        raise ContractError("noise must be nonnegative")
    a1 = matvec(A, np.ones(A.ncols))
    nrm = np.linalg.norm(a1)
    if nrm == 0.0:
        raise DegenerateInputError("A @ ones is zero")
    b = a1 / nrm
    if noise > 0:
        u = uniform_vector(A.nrows, seed)
        b = b + noise * (u / np.linalg.norm(u))
    return b


def random_orthogonal(n, gen):
    """Product of ``n`` random Householder reflectors."""
    Q = np.eye(n)
    for _ in range(n):
        v = gen.standard_normal(n)
        v /= np.linalg.norm(v)
        Q -= 2.0 * np.outer(Q @ v, v)
    return Q


def random_range_symmetric_dense(n, r, cond=1e3, seed=0):
    if not 1 <= r <= n:
        raise ContractError("need 1 <= r <= n")
    gen = rng(seed)
    Q = random_orthogonal(n, gen)
    s = np.logspace(0.0, -np.log10(cond), r) if r > 1 else np.ones(1)
    A11 = random_orthogonal(r, gen) @ np.diag(s) @ random_orthogonal(r, gen).T
    core = np.zeros((n, n))
    core[:r, :r] = A11
    return Q @ core @ Q.T


def random_range_symmetric(n, r, cond=1e3, seed=0) -> SparseMatrixCSR:
    """``Q diag(A11, 0) Q^T`` with random orthogonal ``Q`` and nonsingular ``A11``.

    ``R(A) = R(A^T)`` holds by construction; ``A11`` is unsymmetric with
    singular values log-spaced between 1 and ``1/cond``.
    """
    return from_dense(random_range_symmetric_dense(n, r, cond, seed))


class Family(enum.Enum):
    GP = "gp"
    INDEX2 = "index2"
    MATRIX_MARKET = "matrix"
    RANDOM_RANGE_SYM = "random"


class RHS(enum.Enum):
    AUTO = "auto"
    INCONSISTENT = "inconsistent"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class ProblemSpec:
    """Declarative description of a test instance."""

    family: Family = Family.GP
    rho: float = 12.0
    gamma: float = 12.0
    noise: float = 0.01
    seed: int = 0
    path: str | None = None
    rank_r: int = 0
    size_n: int = 0
    cond: float = 1e3
    rhs: RHS = RHS.AUTO
    transpose: bool = False
    compact: bool = False

    def __post_init__(self):
        if self.family in (Family.GP, Family.INDEX2) and not (self.rho > 0 and self.gamma > 0):
            raise ContractError("rho and gamma must be positive")
        if self.noise < 0:
            raise ContractError("noise must be nonnegative")
        if self.family is Family.MATRIX_MARKET and not self.path:
            raise ContractError("matrix-market problems need a path")

    def matrix(self) -> SparseMatrixCSR:
        if self.family is Family.GP:
            A = gp_matrix(self.rho, self.gamma)
        elif self.family is Family.INDEX2:
            A = index2_matrix(self.rho, self.gamma)
        elif self.family is Family.RANDOM_RANGE_SYM:
            A = random_range_symmetric(self.size_n, self.rank_r, self.cond, self.seed)
        else:
            A = read_matrix_market(Path(self.path))
        if self.transpose:
            A = A.transpose()
        if self.compact:
            A = compact(A)[0]
        return A

    def rhs_vector(self, A: SparseMatrixCSR):
        kind = self.rhs
        if kind is RHS.AUTO:
            kind = RHS.UNIFORM if self.family is Family.MATRIX_MARKET else RHS.INCONSISTENT
        if kind is RHS.UNIFORM:
            return uniform_vector(A.nrows, self.seed)
        return make_rhs_inconsistent(A, self.noise, self.seed)

    def build(self):
        A = self.matrix()
        return A, self.rhs_vector(A)
