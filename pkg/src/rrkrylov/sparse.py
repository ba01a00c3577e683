"""Compressed sparse row storage, products and Matrix Market I/O."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .errors import DegenerateInputError, ParseError, StructuralError

_INDEX = np.int64


def _frozen(a, dtype):
    a = np.ascontiguousarray(a, dtype=dtype)
    if a.flags.writeable:
        a = a.copy()
        a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class SparseMatrixCSR:
    """Real ``nrows x ncols`` matrix in canonical CSR form.

    Column indices are strictly increasing within each row. The arrays are
    made read-only on construction, so instances can be shared freely.
    """

    nrows: int
    ncols: int
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "indptr", _frozen(self.indptr, _INDEX))
        object.__setattr__(self, "indices", _frozen(self.indices, _INDEX))
        object.__setattr__(self, "data", _frozen(self.data, np.float64))
        self._validate()

    def _validate(self):
        ip, ix = self.indptr, self.indices
        if self.nrows < 0 or self.ncols < 0:
            raise StructuralError("negative dimension")
        if ip.shape != (self.nrows + 1,) or ip[0] != 0:
            raise StructuralError("indptr must have length nrows+1 and start at 0")
        if np.any(np.diff(ip) < 0):
            raise StructuralError("indptr must be nondecreasing")
        if ip[-1] != ix.shape[0] or ix.shape != self.data.shape:
            raise StructuralError("indptr[-1], len(indices) and len(data) disagree")
        if ix.size:
            if ix.min() < 0 or ix.max() >= self.ncols:
                raise StructuralError("column index out of range")
            steps = np.diff(ix)
            row_start = np.zeros(ix.size, dtype=bool)
            row_start[ip[1:-1][ip[1:-1] < ix.size]] = True
            if np.any((steps <= 0) & ~row_start[1:]):
                raise StructuralError("column indices must be strictly increasing within a row")
        if not np.all(np.isfinite(self.data)):
            raise StructuralError("matrix contains NaN or Inf")

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    @property
    def nnz(self):
        return int(self.indices.size)

    def matvec(self, x):
        return matvec(self, x)

    def rmatvec(self, y):
        return matvec_transpose(self, y)

    def __matmul__(self, x):
        return matvec(self, x)

    def transpose(self) -> "SparseMatrixCSR":
        rows = np.repeat(np.arange(self.nrows, dtype=_INDEX), np.diff(self.indptr))
        order = np.lexsort((rows, self.indices))
        counts = np.bincount(self.indices, minlength=self.ncols)
        indptr = np.concatenate(([0], np.cumsum(counts)))
        return SparseMatrixCSR(self.ncols, self.nrows, indptr, rows[order], self.data[order])

    @property
    def T(self):
        return self.transpose()

    def to_triplets(self):
        rows = np.repeat(np.arange(self.nrows, dtype=_INDEX), np.diff(self.indptr))
        return rows, self.indices.copy(), self.data.copy()

    def to_dense(self):
        out = np.zeros((self.nrows, self.ncols))
        rows, cols, vals = self.to_triplets()
        out[rows, cols] = vals
        return out

    def frobenius_norm(self):
        return float(np.linalg.norm(self.data))

    def equals(self, other):
        return (
            self.shape == other.shape
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.data, other.data)
        )

    def __repr__(self):
        return f"SparseMatrixCSR({self.nrows}x{self.ncols}, nnz={self.nnz})"


def from_coordinates(triplets, m, n) -> SparseMatrixCSR:
    """Assemble an ``m x n`` CSR matrix from ``(row, col, value)`` triplets.

    ``triplets`` is either an iterable of 3-tuples or a tuple of three arrays.
    Duplicate entries are summed.
    """
    if isinstance(triplets, tuple) and len(triplets) == 3 and np.ndim(triplets[0]) == 1:
        rows, cols, vals = triplets
    else:
        triplets = list(triplets)
        if triplets:
            rows, cols, vals = zip(*triplets)
        else:
            rows, cols, vals = (), (), ()
    rows = np.asarray(rows, dtype=_INDEX)
    cols = np.asarray(cols, dtype=_INDEX)
    vals = np.asarray(vals, dtype=np.float64)
    if not (rows.shape == cols.shape == vals.shape):
        raise StructuralError("row, column and value arrays differ in length")
    if rows.size:
        if rows.min() < 0 or rows.max() >= m:
            raise StructuralError(f"row index out of range for {m} rows")
        if cols.min() < 0 or cols.max() >= n:
            raise StructuralError(f"column index out of range for {n} columns")
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    if rows.size:
        first = np.ones(rows.size, dtype=bool)
        first[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
        starts = np.flatnonzero(first)
        vals = np.add.reduceat(vals, starts)
        rows, cols = rows[starts], cols[starts]
    counts = np.bincount(rows, minlength=m)
    indptr = np.concatenate(([0], np.cumsum(counts)))
    return SparseMatrixCSR(m, n, indptr, cols, vals)


def from_dense(a, drop_zeros=True) -> SparseMatrixCSR:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise StructuralError("expected a 2-D array")
    rows, cols = np.nonzero(a) if drop_zeros else np.indices(a.shape).reshape(2, -1)
    return from_coordinates((rows, cols, a[rows, cols]), *a.shape)


def identity(n) -> SparseMatrixCSR:
    idx = np.arange(n)
    return from_coordinates((idx, idx, np.ones(n)), n, n)


def _vector(x, length, what):
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.shape != (length,):
        raise StructuralError(f"{what}: expected vector of length {length}, got shape {x.shape}")
    return x


def matvec(A: SparseMatrixCSR, x) -> np.ndarray:
    x = _vector(x, A.ncols, "matvec")
    return kernels.csr_matvec(A.indptr, A.indices, A.data, x)


def matvec_transpose(A: SparseMatrixCSR, y) -> np.ndarray:
    """Return ``A^T y`` without forming the transpose."""
    y = _vector(y, A.nrows, "matvec_transpose")
    return kernels.csr_rmatvec(A.indptr, A.indices, A.data, y, A.ncols)


def column_sq_norms(A: SparseMatrixCSR) -> np.ndarray:
    return np.bincount(A.indices, weights=A.data**2, minlength=A.ncols).astype(float)


def compact(A: SparseMatrixCSR):
    """Drop zero rows and zero columns.

    Returns ``(B, row_map, col_map)`` where ``B[i, j] == A[row_map[i], col_map[j]]``.
    """
    keep = A.data != 0
    if not np.any(keep):
        raise DegenerateInputError("matrix has no nonzero entries")
    rows, cols, vals = A.to_triplets()
    rows, cols, vals = rows[keep], cols[keep], vals[keep]
    row_map = np.unique(rows)
    col_map = np.unique(cols)
    new_rows = np.searchsorted(row_map, rows)
    new_cols = np.searchsorted(col_map, cols)
    B = from_coordinates((new_rows, new_cols, vals), row_map.size, col_map.size)
    return B, row_map, col_map


_ACCEPTED_SYMMETRY = ("general", "symmetric")


def read_matrix_market(path) -> SparseMatrixCSR:
    """Read a ``matrix coordinate real {general|symmetric}`` file.

    Symmetric storage is expanded to both triangles. Errors carry the
    1-based line number of the offending line.
    """
    path = Path(path)
    with open(path, "r") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("empty file", 1, path)
    head = lines[0].split()
    if len(head) != 5 or head[0].lower() != "%%matrixmarket":
        raise ParseError("missing %%MatrixMarket header", 1, path)
    obj, fmt, field, symmetry = (h.lower() for h in head[1:])
    if obj != "matrix" or fmt != "coordinate":
        raise ParseError(f"unsupported layout '{obj} {fmt}'", 1, path)
    if field != "real":
        raise ParseError(f"unsupported field '{field}' (only real)", 1, path)
    if symmetry not in _ACCEPTED_SYMMETRY:
        raise ParseError(f"unsupported symmetry '{symmetry}'", 1, path)

    lineno = 1
    size = None
    for lineno in range(2, len(lines) + 1):
        s = lines[lineno - 1].strip()
        if s and not s.startswith("%"):
            size = s.split()
            break
    if size is None:
        raise ParseError("missing size line", lineno, path)
    try:
        m, n, nnz = (int(t) for t in size)
    except ValueError:
        raise ParseError("size line must be 'rows cols nnz'", lineno, path) from None
    if m < 0 or n < 0 or nnz < 0:
        raise ParseError("negative size", lineno, path)

    rows = np.empty(nnz, dtype=_INDEX)
    cols = np.empty(nnz, dtype=_INDEX)
    vals = np.empty(nnz)
    k = 0
    for lineno in range(lineno + 1, len(lines) + 1):
        s = lines[lineno - 1].strip()
        if not s or s.startswith("%"):
            continue
        if k >= nnz:
            raise ParseError(f"more than the declared {nnz} entries", lineno, path)
        parts = s.split()
        if len(parts) != 3:
            raise ParseError("entry must be 'row col value'", lineno, path)
        try:
            i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise ParseError(f"malformed entry '{s}'", lineno, path) from None
        if not (1 <= i <= m and 1 <= j <= n):
            raise ParseError(f"index ({i}, {j}) outside declared {m}x{n}", lineno, path)
        if not np.isfinite(v):
            raise ParseError("non-finite value", lineno, path)
        rows[k], cols[k], vals[k] = i - 1, j - 1, v
        k += 1
    if k != nnz:
        raise ParseError(f"declared {nnz} entries, found {k}", len(lines), path)

    if symmetry == "symmetric":
        if m != n:
            raise ParseError("symmetric matrix must be square", 1, path)
        off = rows != cols
        rows, cols, vals = (
            np.concatenate((rows, cols[off])),
            np.concatenate((cols, rows[off])),
            np.concatenate((vals, vals[off])),
        )
    return from_coordinates((rows, cols, vals), m, n)


def write_matrix_market(A: SparseMatrixCSR, path, comment=None):
    """Write ``A`` as ``matrix coordinate real general`` with 1-based indices."""
    rows, cols, vals = A.to_triplets()
    out = ["%%MatrixMarket matrix coordinate real general"]
    if comment:
        out.extend(f"% {line}" for line in comment.splitlines())
    out.append(f"{A.nrows} {A.ncols} {A.nnz}")
    out.extend(f"{i + 1} {j + 1} {v!r}" for i, j, v in zip(rows.tolist(), cols.tolist(), vals.tolist()))
    Path(path).write_text("\n".join(out) + "\n")
