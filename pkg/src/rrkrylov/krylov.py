"""GMRES, RRGMRES and their right-preconditioned (AB) variants.

All four methods share one Arnoldi driver. GMRES starts the basis from
``r0``; RRGMRES starts it from ``A r0`` so the search space is
``K_k(A, A r0)``. In both cases the iterate minimises

    ||H y - V^T r0||^2 + ||(I - V V^T) r0||^2,

and the second term is carried explicitly as the vector ``p`` (``r0`` with
its components along the basis removed), so the residual of each iterate
is known without a matrix product. For GMRES that term is zero up to
rounding.
"""

from __future__ import annotations

import collections
import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .analysis import ConvergenceHistory
from .errors import ContractError, StructuralError
from .hessenberg import HessenbergFactorization
from .precond import RightPreconditioner
from .sparse import SparseMatrixCSR, matvec, matvec_transpose


_MAX_REORTH = 4
_STALL_RTOL = 1e-10


class Status(enum.Enum):
    CONVERGED_NE = "converged_ne"
    CONVERGED_RES = "converged_res"
    HAPPY_BREAKDOWN = "happy_breakdown"
    MAX_ITERS = "max_iters"
    STAGNATED = "stagnated"

    @property
    def success(self):
        return self in (Status.CONVERGED_NE, Status.CONVERGED_RES, Status.HAPPY_BREAKDOWN)


class Method(enum.Enum):
    GMRES = "gmres"
    RRGMRES = "rrgmres"


@dataclass
class SolverOptions:
    """Stopping and orthogonalization controls.

    ``tol_ne`` stops on ``||A^T r_k|| / ||A^T b||``; ``tol_res`` on
    ``||r_k|| / ||b||``. Either may be ``None`` to disable it. A breakdown is
    declared when ``h[k+1,k] <= breakdown_tol * ||A||``.
    """

    max_iters: int = 1000
    tol_ne: float | None = 1e-7
    tol_res: float | None = None
    breakdown_tol: float = 1e-14
    orthogonalization: str = "mgs"
    record_history: bool = True
    stagnation_window: int = 30

    def __post_init__(self):
        if self.max_iters < 1:
            raise ContractError("max_iters must be >= 1")
        for name in ("tol_ne", "tol_res"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ContractError(f"{name} must be positive")
        if not self.breakdown_tol > 0:
            raise ContractError("breakdown_tol must be positive")
        if self.orthogonalization not in ("mgs", "cgs"):
            raise ContractError("orthogonalization must be 'mgs' or 'cgs'")


@dataclass
class SolveOutcome:
    x: np.ndarray
    iterations: int
    status: Status
    history: ConvergenceHistory | None
    final_ne: float
    residual_norm: float
    hessenberg: HessenbergFactorization | None = field(default=None, repr=False)
    basis: np.ndarray | None = field(default=None, repr=False)
    elapsed: float = 0.0
    breakdown: bool = False

    @property
    def min_ne(self):
        if self.history is not None and len(self.history):
            return self.history.min_ne
        return self.final_ne, self.iterations


class _Workspace:
    """Row-major basis storage that grows on demand."""

    def __init__(self, width, capacity):
        self.rows = np.zeros((max(min(capacity, 32), 1), width))

    def ensure(self, k):
        if k >= self.rows.shape[0]:
            new = np.zeros((max(2 * self.rows.shape[0], k + 1), self.rows.shape[1]))
            new[: self.rows.shape[0]] = self.rows
            self.rows = new
        return self.rows


def _orthogonalize(V, k, w, scheme):
    if scheme == "cgs":
        h = V[:k] @ w
        w -= V[:k].T @ h
        return h
    return kernels.mgs_project(V, k, w)


def _arnoldi(A, b, x0, opts, method, precond=None):
    m = A.nrows
    b = np.ascontiguousarray(b, dtype=np.float64)
    if b.shape != (m,):
        raise StructuralError(f"b must have length {m}")
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    if x0.shape != (A.ncols,):
        raise StructuralError(f"x0 must have length {A.ncols}")
    method = Method(method)

    if precond is None:
        def op(v):
            return matvec(A, v), v
        norm_A = A.frobenius_norm()
    else:
        def op(v):
            u = precond.apply(v)
            return matvec(A, u), u
        norm_A = 0.0  # estimated from ||A B v|| as the basis grows

    t_start = time.perf_counter()
    t_diag = 0.0
    atb_norm = float(np.linalg.norm(matvec_transpose(A, b)))
    ne_scale = atb_norm if atb_norm > 0.0 else 1.0
    b_norm = float(np.linalg.norm(b))
    history = ConvergenceHistory() if opts.record_history else None

    r0 = b - matvec(A, x0)
    r0_norm = float(np.linalg.norm(r0))

    def outcome(x, k, status, fact=None, V=None, broke=False):
        r = b - matvec(A, x)
        ne = float(np.linalg.norm(matvec_transpose(A, r)) / ne_scale)
        return SolveOutcome(x, k, status, history, ne, float(np.linalg.norm(r)), fact, V,
                            time.perf_counter() - t_start - t_diag, broke)

    if r0_norm == 0.0:
        return outcome(x0.copy(), 0, Status.CONVERGED_RES)

    if method is Method.RRGMRES:
        start, _ = op(r0)
    else:
        start = r0
    start_norm = float(np.linalg.norm(start))
    if start_norm == 0.0:
        return outcome(x0.copy(), 0, Status.STAGNATED)
    if precond is not None and method is Method.RRGMRES:
        norm_A = start_norm / r0_norm

    Vw = _Workspace(m, opts.max_iters + 1)
    Uw = _Workspace(A.ncols, opts.max_iters) if precond is not None else None
    V = Vw.rows
    V[0] = start / start_norm
    p = r0.copy()
    g1 = float(V[0] @ p)
    p -= g1 * V[0]
    fact = HessenbergFactorization(min(opts.max_iters, 64), g1)

    best_ne = math.inf
    since_best = 0
    res_trail = collections.deque(maxlen=opts.stagnation_window + 1)
    status = Status.MAX_ITERS
    broke_down = False
    y = None
    k = 0
    for j in range(opts.max_iters):
        V = Vw.ensure(j + 1)
        w, u = op(V[j])
        if Uw is not None:
            Uw.ensure(j)[j] = u
        w_norm0 = float(np.linalg.norm(w))
        if precond is not None:
            norm_A = max(norm_A, w_norm0)
        h = _orthogonalize(V, j + 1, w, opts.orthogonalization)
        h_next = float(np.linalg.norm(w))
        if opts.orthogonalization == "mgs":
            prev, passes = w_norm0, 0
            # repeat while more than half the norm cancels; near a breakdown
            # one extra pass cannot restore orthogonality
            while h_next < 0.5 * prev and h_next > 0.0 and passes < _MAX_REORTH:
                prev = h_next
                h += _orthogonalize(V, j + 1, w, "mgs")
                h_next = float(np.linalg.norm(w))
                passes += 1

        # At a breakdown the (noise) vector w/h_next is not formed, but the
        # tiny h_next itself stays in the small problem with a zero rhs entry.
        breakdown = h_next <= opts.breakdown_tol * norm_A
        g_next = 0.0
        if not breakdown:
            V[j + 1] = w / h_next
            g_next = float(V[j + 1] @ p)
            p -= g_next * V[j + 1]
        fact.add_column(np.append(h, h_next), g_next)
        k = j + 1
        comp = float(np.linalg.norm(p))

        y = fact.solve()
        ls = fact.direct_residual(y) if breakdown else fact.residual_norm
        res_est = math.hypot(ls, comp)

        ne = None
        if opts.record_history or opts.tol_ne is not None:
            t0 = time.perf_counter()
            basis = Uw.rows if Uw is not None else V
            x = x0 + basis[:k].T @ y
            r = b - matvec(A, x)
            ne = float(np.linalg.norm(matvec_transpose(A, r)) / ne_scale)
            res_true = float(np.linalg.norm(r))
            t_diag += time.perf_counter() - t0
            if history is not None:
                history.append(k, res_true, ne, time.perf_counter() - t_start - t_diag, ls, comp)

        if breakdown:
            # The Krylov space is exhausted. It is a happy breakdown when the
            # iterate passes the stopping test; otherwise nothing more can be
            # gained and the run is reported as stagnated.
            broke_down = True
            ok_ne = opts.tol_ne is None or (ne is not None and ne < opts.tol_ne)
            ok_res = opts.tol_res is not None and res_est < opts.tol_res * b_norm
            status = Status.HAPPY_BREAKDOWN if ok_ne or ok_res else Status.STAGNATED
            break
        if ne is not None and opts.tol_ne is not None and ne < opts.tol_ne:
            status = Status.CONVERGED_NE
            break
        if opts.tol_res is not None and res_est < opts.tol_res * b_norm:
            status = Status.CONVERGED_RES
            break
        res_trail.append(res_est)
        if ne is not None:
            if ne < best_ne * (1.0 - 1e-16):
                best_ne, since_best = ne, 0
            else:
                since_best += 1
            # the NE ratio is not monotone; a plateau only counts once the
            # monotone residual has also stopped moving
            if (since_best >= opts.stagnation_window
                    and len(res_trail) > opts.stagnation_window
                    and res_trail[0] - res_est <= _STALL_RTOL * res_trail[0]):
                status = Status.STAGNATED
                break

    basis = Uw.rows if Uw is not None else Vw.rows
    x = x0 + basis[:k].T @ y
    return outcome(x, k, status, fact, Vw.rows[: k + (0 if broke_down else 1)].copy(), broke_down)


def _square(A):
    if A.nrows != A.ncols:
        raise StructuralError(f"expected a square matrix, got {A.shape}")


def gmres(A: SparseMatrixCSR, b, x0=None, opts: SolverOptions | None = None) -> SolveOutcome:
    """Full-memory GMRES on a square system."""
    _square(A)
    opts = opts or SolverOptions()
    return _arnoldi(A, b, np.zeros(A.ncols) if x0 is None else x0, opts, Method.GMRES)


def rrgmres(A: SparseMatrixCSR, b, x0=None, opts: SolverOptions | None = None) -> SolveOutcome:
    """Range-restricted GMRES: iterates drawn from ``x0 + K_k(A, A r0)``.

    Returns ``STAGNATED`` with zero iterations when ``A r0 = 0``.
    """
    _square(A)
    opts = opts or SolverOptions()
    return _arnoldi(A, b, np.zeros(A.ncols) if x0 is None else x0, opts, Method.RRGMRES)


def ab_solve(A: SparseMatrixCSR, B: RightPreconditioner, b, opts: SolverOptions | None = None,
             method="rrgmres") -> SolveOutcome:
    """Solve ``min ||b - A x||`` as ``min_z ||b - A B z||`` with ``x = B z``.

    ``A`` may be rectangular. The Krylov method runs on ``v -> A B v`` over
    ``R^m`` starting from ``z0 = 0``; the ``B v`` products are kept so the
    returned ``x`` costs no extra preconditioner application.
    """
    if B.matrix is not A and B.shape != (A.ncols, A.nrows):
        raise StructuralError("preconditioner shape does not match A")
    opts = opts or SolverOptions()
    return _arnoldi(A, b, np.zeros(A.ncols), opts, Method(method), precond=B)


def extract_hessenberg(outcome: SolveOutcome) -> np.ndarray:
    """Un-rotated ``(k+1) x k`` Hessenberg matrix of a finished solve."""
    if outcome.history is None or outcome.hessenberg is None:
        raise ContractError("extract_hessenberg needs a solve run with record_history=True")
    return outcome.hessenberg.hessenberg()
