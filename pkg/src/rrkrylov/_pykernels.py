"""Pure-Python/numpy versions of the hot loops.

Used when the compiled ``_ckernels`` extension is missing or when
``RRKRYLOV_PURE_PYTHON=1`` is set. Signatures match ``_ckernels.pyx``.
"""

import numpy as np

NAME = "python"


def csr_matvec(indptr, indices, data, x):
    nrows = indptr.shape[0] - 1
    prod = data * x[indices]
    out = np.zeros(nrows)
    nonempty = indptr[:-1] < indptr[1:]
    if prod.size:
        out[nonempty] = np.add.reduceat(prod, indptr[:-1][nonempty])
    return out


def csr_rmatvec(indptr, indices, data, y, ncols):
    rows = np.repeat(np.arange(indptr.shape[0] - 1), np.diff(indptr))
    return np.bincount(indices, weights=data * y[rows], minlength=ncols).astype(float)


def nrssor_sweeps(colptr, rowidx, colval, col_sq, c, omega, ell):
    # colptr/rowidx/colval: CSR of A^T, i.e. the columns of A.
    n = colptr.shape[0] - 1
    r = np.array(c, dtype=float, copy=True)
    z = np.zeros(n)
    spans = [(colptr[j], colptr[j + 1]) for j in range(n)]
    for _ in range(ell):
        for order in (range(n), range(n - 1, -1, -1)):
            for j in order:
                lo, hi = spans[j]
                idx = rowidx[lo:hi]
                a = colval[lo:hi]
                d = omega * np.dot(r[idx], a) / col_sq[j]
                z[j] += d
                r[idx] -= d * a
    return z


def mgs_project(V, k, w):
    """Orthogonalize ``w`` in place against rows ``V[:k]``; return coefficients."""
    h = np.empty(k)
    for i in range(k):
        h[i] = np.dot(V[i], w)
        w -= h[i] * V[i]
    return h
