"""Command-line harness: ``rrkrylov {generate,solve,verify,bench}``.

Exit codes: 0 when the solve converged (or broke down at an acceptable
iterate), 2 when it hit ``--max-iters`` or stagnated (results are still
written), 1 on usage, file or structural errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import condition_number, export_history_csv, numerical_rank, verify_clustering
from .dense import CholeskyFailure, cholesky
from .errors import RRKrylovError
from .krylov import SolverOptions, Status, ab_solve, gmres, rrgmres
from .precond import RightPreconditioner, materialize_C
from .problems import RHS, Family, ProblemSpec
from .sparse import write_matrix_market

log = logging.getLogger("rrkrylov")

METHODS = ("gmres", "rrgmres", "ab-gmres", "ab-rrgmres")
PRECONDS = ("none", "at", "diag-at", "nrssor")
DEFAULT_GAMMA = {"gp": 12.0, "index2": 15.0}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    problem: ProblemSpec
    method: str = "ab-rrgmres"
    precond: str = "nrssor"
    inner_iters: int = 1
    omega: float = 1.0
    tol: float = 1e-7
    tol_res: float | None = None
    max_iters: int | None = None
    orthogonalization: str = "mgs"
    output: Path | None = None
    timing: bool = False

    def __post_init__(self):
        plain = self.method in ("gmres", "rrgmres")
        if plain and self.precond != "none":
            raise UsageError(f"method {self.method} takes no preconditioner (use ab-{self.method})")
        if not plain and self.precond == "none":
            raise UsageError(f"method {self.method} needs --precond at, diag-at or nrssor")
        if self.precond == "nrssor" and self.inner_iters < 1:
            raise UsageError("--inner-iters must be >= 1")


def _add_problem_args(p):
    g = p.add_argument_group("problem")
    g.add_argument("--problem", choices=[f.value for f in Family], default="gp",
                   help="test family (default: gp; --matrix implies 'matrix')")
    g.add_argument("--matrix", type=Path, default=None, help="Matrix Market file (default: none)")
    g.add_argument("--rho", type=float, default=12.0, help="alpha decay exponent (default: 12)")
    g.add_argument("--gamma", type=float, default=None,
                   help="beta decay exponent (default: 12 for gp, 15 for index2)")
    g.add_argument("--noise", type=float, default=0.01, help="RHS noise level (default: 0.01)")
    g.add_argument("--seed", type=int, default=0, help="PCG64 seed for random data (default: 0)")
    g.add_argument("--rhs", choices=[r.value for r in RHS], default="auto",
                   help="right-hand side recipe (default: auto = uniform for matrix files, "
                        "inconsistent otherwise)")
    g.add_argument("--transpose", action="store_true", help="transpose the loaded matrix (default: off)")
    g.add_argument("--compact", action="store_true",
                   help="drop zero rows and columns after loading (default: off)")
    g.add_argument("--size", type=int, default=40, help="n for --problem random (default: 40)")
    g.add_argument("--rank", type=int, default=20, help="rank for --problem random (default: 20)")
    g.add_argument("--cond", type=float, default=1e3, help="cond(A11) for --problem random (default: 1e3)")


def _add_solver_args(p, sweep=False):
    g = p.add_argument_group("solver")
    if not sweep:
        g.add_argument("--method", choices=METHODS, default="ab-rrgmres", help="(default: ab-rrgmres)")
        g.add_argument("--precond", choices=PRECONDS, default=None,
                       help="(default: none for gmres/rrgmres, nrssor otherwise)")
        g.add_argument("--inner-iters", type=int, default=1, help="NR-SSOR sweeps ell (default: 1)")
    g.add_argument("--omega", type=float, default=1.0, help="NR-SSOR relaxation (default: 1.0)")
    g.add_argument("--tol", type=float, default=1e-7,
                   help="stop when ||A^T r||/||A^T b|| < tol (default: 1e-7)")
    g.add_argument("--tol-res", type=float, default=None, help="stop when ||r||/||b|| < tol-res (default: off)")
    g.add_argument("--max-iters", type=int, default=None, help="(default: min(m, 10000))")
    g.add_argument("--orthogonalization", choices=("mgs", "cgs"), default="mgs", help="(default: mgs)")
    g.add_argument("--timing", action="store_true",
                   help="write wall-clock seconds into the CSV (default: off, column is zero "
                        "so repeated runs give identical files)")


def build_parser():
    parser = argparse.ArgumentParser(prog="rrkrylov", description=__doc__.splitlines()[0],
                                     formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a test matrix (and optionally its RHS)")
    _add_problem_args(p)
    p.add_argument("--output", type=Path, required=True, help="Matrix Market output path")
    p.add_argument("--rhs-output", type=Path, default=None, help="write b, one value per line (default: off)")

    p = sub.add_parser("solve", help="run one solver configuration")
    _add_problem_args(p)
    _add_solver_args(p)
    p.add_argument("--output", type=Path, default=None, help="history CSV path (default: none)")

    p = sub.add_parser("verify", help="check C^(ell) SPD and the eigenvalue clustering densely")
    _add_problem_args(p)
    p.add_argument("--omega", type=float, default=1.0, help="(default: 1.0)")
    p.add_argument("--inner-iters", type=int, default=1, help="(default: 1)")

    p = sub.add_parser("bench", help="compare preconditioners on one problem")
    _add_problem_args(p)
    _add_solver_args(p, sweep=True)
    p.add_argument("--method", choices=("ab-gmres", "ab-rrgmres"), default="ab-rrgmres",
                   help="(default: ab-rrgmres)")
    p.add_argument("--sweep", default="nrssor:1,diag-at,at",
                   help="comma list of at | diag-at | nrssor:ELL (default: nrssor:1,diag-at,at)")
    p.add_argument("--output", type=Path, default=None, help="write the table as CSV (default: none)")
    return parser


def problem_from_args(args) -> ProblemSpec:
    family = "matrix" if args.matrix is not None else args.problem
    gamma = args.gamma if args.gamma is not None else DEFAULT_GAMMA.get(family, 12.0)
    return ProblemSpec(
        family=Family(family),
        rho=args.rho,
        gamma=gamma,
        noise=args.noise,
        seed=args.seed,
        path=str(args.matrix) if args.matrix is not None else None,
        rank_r=args.rank,
        size_n=args.size,
        cond=args.cond,
        rhs=RHS(args.rhs),
        transpose=args.transpose,
        compact=args.compact,
    )


def _options(cfg: RunConfig, m):
    max_iters = cfg.max_iters if cfg.max_iters is not None else min(m, 10000)
    return SolverOptions(max_iters=max_iters, tol_ne=cfg.tol, tol_res=cfg.tol_res,
                         orthogonalization=cfg.orthogonalization)


def run_solve(cfg: RunConfig, A=None, b=None):
    """Run one configuration; returns the :class:`SolveOutcome`."""
    if A is None:
        A, b = cfg.problem.build()
    opts = _options(cfg, A.nrows)
    if cfg.method == "gmres":
        return gmres(A, b, opts=opts)
    if cfg.method == "rrgmres":
        return rrgmres(A, b, opts=opts)
    B = RightPreconditioner.build(cfg.precond, A, cfg.omega, cfg.inner_iters)
    return ab_solve(A, B, b, opts, method=cfg.method[3:])


def summary_line(cfg: RunConfig, outcome):
    min_ne, _ = outcome.min_ne
    precond = cfg.precond if cfg.precond != "nrssor" else f"nrssor{cfg.inner_iters}"
    return f"{cfg.method} {precond} {outcome.iterations} {min_ne:.3e} {outcome.elapsed:.4f}"


def exit_code(status: Status):
    return 0 if status.success else 2


def cmd_generate(args):
    spec = problem_from_args(args)
    A, b = spec.build()
    write_matrix_market(A, args.output, comment=f"rrkrylov generate {spec.family.value} rho={spec.rho} "
                                                f"gamma={spec.gamma}")
    if args.rhs_output is not None:
        Path(args.rhs_output).write_text("".join(f"{v!r}\n" for v in b.tolist()))
    print(f"wrote {args.output} ({A.nrows}x{A.ncols}, nnz={A.nnz})")
    return 0


def _config(args, method, precond, inner_iters):
    return RunConfig(
        problem=problem_from_args(args),
        method=method,
        precond=precond,
        inner_iters=inner_iters,
        omega=args.omega,
        tol=args.tol,
        tol_res=args.tol_res,
        max_iters=args.max_iters,
        orthogonalization=args.orthogonalization,
        output=args.output,
        timing=args.timing,
    )


def cmd_solve(args):
    precond = args.precond
    if precond is None:
        precond = "none" if args.method in ("gmres", "rrgmres") else "nrssor"
    cfg = _config(args, args.method, precond, args.inner_iters)
    outcome = run_solve(cfg)
    log.info("status %s, final NE ratio %.3e", outcome.status.value, outcome.final_ne)
    if cfg.output is not None:
        export_history_csv(outcome.history, cfg.output, timing=cfg.timing)
    print(summary_line(cfg, outcome))
    return exit_code(outcome.status)


def cmd_verify(args):
    spec = problem_from_args(args)
    A = spec.matrix()
    rank = numerical_rank(A)
    print(f"matrix {A.nrows}x{A.ncols} nnz={A.nnz} rank={rank} kappa={condition_number(A):.3e}")
    C = materialize_C(A, args.omega, args.inner_iters)
    asym = float(np.abs(C - C.T).max() / np.abs(C).max())
    spd = not isinstance(cholesky(0.5 * (C + C.T)), CholeskyFailure)
    print(f"C(ell={args.inner_iters}, omega={args.omega}) asymmetry={asym:.2e} spd={spd}")
    rep = verify_clustering(A, args.omega, args.inner_iters, rank=rank)
    lo, hi = rep.interval
    print(f"rho(H)={rep.rho_H:.6g} interval=[{lo:.6g}, {hi:.6g}] clustered={rep.n_clustered} "
          f"zero={rep.n_zero} outside={rep.n_outside} max|zero|={rep.max_zero_abs:.2e} "
          f"shared_spectrum_err={rep.shared_spectrum_err:.2e}")
    ok = spd and asym <= 1e-11 and rep.passed
    print("PASS" if ok else "FAIL")
    return 0 if ok else 2


def parse_sweep(text):
    entries = []
    for item in (t.strip() for t in text.split(",")):
        if not item:
            continue
        name, _, ell = item.partition(":")
        if name not in ("at", "diag-at", "nrssor"):
            raise UsageError(f"unknown sweep entry '{item}'")
        if ell and name != "nrssor":
            raise UsageError(f"'{name}' takes no inner-iteration count")
        try:
            entries.append((name, int(ell) if ell else 1))
        except ValueError:
            raise UsageError(f"bad inner-iteration count in '{item}'") from None
    if not entries:
        raise UsageError("--sweep is empty")
    return entries


def run_bench(cfgs, A=None, b=None):
    """Run a list of RunConfigs on one problem; returns rows of results."""
    if A is None:
        A, b = cfgs[0].problem.build()
    rows = []
    for cfg in cfgs:
        t0 = time.perf_counter()
        out = run_solve(cfg, A, b)
        wall = time.perf_counter() - t0
        min_ne, at = out.min_ne
        rows.append({
            "precond": cfg.precond if cfg.precond != "nrssor" else f"nrssor:{cfg.inner_iters}",
            "iters": out.iterations,
            "status": out.status.value,
            "final_ne": out.final_ne,
            "min_ne": min_ne,
            "iter_at_min": at,
            "tno_sec": out.elapsed,
            "wall_sec": wall,
        })
    return rows


def cmd_bench(args):
    entries = parse_sweep(args.sweep)
    cfgs = [_config(args, args.method, name, ell) for name, ell in entries]
    rows = run_bench(cfgs)
    cols = ("precond", "iters", "status", "final_ne", "min_ne", "iter_at_min", "tno_sec")
    print(f"{'precond':<10} {'iters':>6} {'status':<16} {'final_ne':>10} {'min_ne':>10} {'at_min':>6} {'Tno[s]':>8}")
    for r in rows:
        print(f"{r['precond']:<10} {r['iters']:>6} {r['status']:<16} {r['final_ne']:>10.3e} "
              f"{r['min_ne']:>10.3e} {r['iter_at_min']:>6} {r['tno_sec']:>8.4f}")
    if args.output is not None:
        with open(args.output, "w") as fh:
            fh.write(",".join(cols) + "\n")
            for r in rows:
                fh.write(",".join(str(r[c]) for c in cols) + "\n")
    return 0 if all(Status(r["status"]).success for r in rows) else 2


COMMANDS = {"generate": cmd_generate, "solve": cmd_solve, "verify": cmd_verify, "bench": cmd_bench}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, RRKrylovError, OSError) as exc:
        print(f"rrkrylov {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
