# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: CSR products, NR-SSOR sweeps, modified Gram-Schmidt."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

NAME = "cython"


def csr_matvec(const cnp.int64_t[::1] indptr, const cnp.int64_t[::1] indices,
               const double[::1] data, const double[::1] x):
    cdef Py_ssize_t nrows = indptr.shape[0] - 1
    cdef Py_ssize_t i, p
    cdef double acc
    out = np.zeros(nrows)
    cdef double[::1] y = out
    for i in range(nrows):
        acc = 0.0
        for p in range(indptr[i], indptr[i + 1]):
            acc += data[p] * x[indices[p]]
        y[i] = acc
    return out


def csr_rmatvec(const cnp.int64_t[::1] indptr, const cnp.int64_t[::1] indices,
                const double[::1] data, const double[::1] y, Py_ssize_t ncols):
    cdef Py_ssize_t nrows = indptr.shape[0] - 1
    cdef Py_ssize_t i, p
    cdef double yi
    out = np.zeros(ncols)
    cdef double[::1] z = out
    for i in range(nrows):
        yi = y[i]
        if yi == 0.0:
            continue
        for p in range(indptr[i], indptr[i + 1]):
            z[indices[p]] += data[p] * yi
    return out


cdef inline void _column_step(const cnp.int64_t[::1] colptr, const cnp.int64_t[::1] rowidx,
                              const double[::1] colval, const double[::1] col_sq,
                              double[::1] r, double[::1] z, Py_ssize_t j,
                              double omega) noexcept nogil:
    cdef Py_ssize_t p
    cdef double acc = 0.0
    cdef double d
    for p in range(colptr[j], colptr[j + 1]):
        acc += r[rowidx[p]] * colval[p]
    d = omega * acc / col_sq[j]
    z[j] += d
    for p in range(colptr[j], colptr[j + 1]):
        r[rowidx[p]] -= d * colval[p]


def nrssor_sweeps(const cnp.int64_t[::1] colptr, const cnp.int64_t[::1] rowidx,
                  const double[::1] colval, const double[::1] col_sq,
                  const double[::1] c, double omega, Py_ssize_t ell):
    cdef Py_ssize_t n = colptr.shape[0] - 1
    cdef Py_ssize_t k, j
    r_arr = np.array(c, dtype=np.float64, copy=True)
    z_arr = np.zeros(n)
    cdef double[::1] r = r_arr
    cdef double[::1] z = z_arr
    with nogil:
        for k in range(ell):
            for j in range(n):
                _column_step(colptr, rowidx, colval, col_sq, r, z, j, omega)
            for j in range(n - 1, -1, -1):
                _column_step(colptr, rowidx, colval, col_sq, r, z, j, omega)
    return z_arr


def mgs_project(const double[:, ::1] V, Py_ssize_t k, double[::1] w):
    """Orthogonalize ``w`` in place against rows ``V[:k]``; return coefficients."""
    cdef Py_ssize_t m = w.shape[0]
    cdef Py_ssize_t i, t
    cdef double acc
    h_arr = np.empty(k)
    cdef double[::1] h = h_arr
    with nogil:
        for i in range(k):
            acc = 0.0
            for t in range(m):
                acc += V[i, t] * w[t]
            h[i] = acc
            for t in range(m):
                w[t] -= acc * V[i, t]
    return h_arr
