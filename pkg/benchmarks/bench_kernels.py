"""Compare the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--m 3296] [--n 4654] [--density 0.006] [--repeat 5]

The default shape and density mimic the transposed, compacted Maragal_5
matrix (about 93k nonzeros). A last row times one full NR-SSOR(4)
preconditioned solve with each backend.
"""

import argparse
import time

import numpy as np

from rrkrylov import kernels
from rrkrylov.krylov import SolverOptions, ab_solve
from rrkrylov.precond import RightPreconditioner
from rrkrylov.sparse import column_sq_norms, from_coordinates


def synthetic(m, n, density, seed):
    g = np.random.Generator(np.random.PCG64(seed))
    nnz = int(density * m * n)
    rows = g.integers(0, m, nnz)
    cols = np.concatenate([np.arange(n), g.integers(0, n, nnz - n)])  # every column used
    rows = np.concatenate([g.integers(0, m, n), rows[n:]])
    return from_coordinates((rows, cols, g.standard_normal(nnz)), m, n)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def kernel_cases(A, be):
    At = A.transpose()
    g = np.random.Generator(np.random.PCG64(1))
    x, y = g.standard_normal(A.ncols), g.standard_normal(A.nrows)
    sq = column_sq_norms(A)
    V = np.ascontiguousarray(np.linalg.qr(g.standard_normal((A.nrows, 50)))[0].T)
    return {
        "csr_matvec": lambda: be.csr_matvec(A.indptr, A.indices, A.data, x),
        "csr_rmatvec": lambda: be.csr_rmatvec(A.indptr, A.indices, A.data, y, A.ncols),
        "nrssor_sweeps(ell=1)": lambda: be.nrssor_sweeps(At.indptr, At.indices, At.data, sq, y, 1.0, 1),
        "mgs_project(k=50)": lambda: be.mgs_project(V, 50, y.copy()),
    }


def solve_with(backend, A, b):
    names = ("csr_matvec", "csr_rmatvec", "nrssor_sweeps", "mgs_project")
    saved = {k: getattr(kernels, k) for k in names}
    for k in names:
        setattr(kernels, k, getattr(backend, k))
    try:
        t0 = time.perf_counter()
        out = ab_solve(A, RightPreconditioner.nrssor(A, 1.0, 4), b,
                       SolverOptions(tol_ne=1e-7, max_iters=2000, record_history=False))
        return time.perf_counter() - t0, out.iterations
    finally:
        for k, fn in saved.items():
            setattr(kernels, k, fn)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=3296)
    ap.add_argument("--n", type=int, default=4654)
    ap.add_argument("--density", type=float, default=0.006)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--no-solve", action="store_true", help="skip the end-to-end solve")
    args = ap.parse_args()

    if kernels.compiled_backend is None:
        raise SystemExit("compiled kernels not built; run `pip install -e . --no-build-isolation` first")
    A = synthetic(args.m, args.n, args.density, args.seed)
    print(f"matrix {A.nrows}x{A.ncols}, nnz={A.nnz}; best of {args.repeat}")
    py = kernel_cases(A, kernels.python_backend)
    cy = kernel_cases(A, kernels.compiled_backend)
    print(f"{'kernel':<22} {'numpy [ms]':>11} {'cython [ms]':>12} {'speedup':>8}")
    for name in py:
        tp, tc = best_of(py[name], args.repeat), best_of(cy[name], args.repeat)
        print(f"{name:<22} {1e3 * tp:>11.3f} {1e3 * tc:>12.3f} {tp / tc:>8.1f}")
    if not args.no_solve:
        b = np.random.Generator(np.random.PCG64(args.seed)).random(A.nrows)
        tp, ip = solve_with(kernels.python_backend, A, b)
        tc, ic = solve_with(kernels.compiled_backend, A, b)
        print(f"{'AB-RRGMRES NR-SSOR(4)':<22} {1e3 * tp:>11.1f} {1e3 * tc:>12.1f} {tp / tc:>8.1f}"
              f"   ({ip} / {ic} iterations)")


if __name__ == "__main__":
    main()
