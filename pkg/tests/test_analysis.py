import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rrkrylov.analysis import (
    CSV_HEADER,
    ConvergenceHistory,
    condition_number,
    export_history_csv,
    lstsq_min_norm,
    ne_residual_ratio,
    nullspace_component,
    numerical_rank,
    read_history_csv,
    verify_clustering,
)
from rrkrylov.errors import ContractError, DegenerateInputError
from rrkrylov.krylov import SolverOptions, ab_solve
from rrkrylov.precond import RightPreconditioner
from rrkrylov.problems import gp_matrix, make_rhs_inconsistent, random_range_symmetric
from rrkrylov.sparse import from_dense, identity

from conftest import random_csr


def test_ne_ratio_trivial(gen):
    A = from_dense(gen.standard_normal((5, 5)) + 3 * np.eye(5))
    b = gen.standard_normal(5)
    assert ne_residual_ratio(A, b, np.linalg.solve(A.to_dense(), b)) == pytest.approx(0.0, abs=1e-14)
    assert ne_residual_ratio(A, b, np.zeros(5)) == 1.0


def test_ne_ratio_least_squares(gen):
    A = from_dense(gen.standard_normal((10, 4)))
    b = gen.standard_normal(10)
    assert ne_residual_ratio(A, b, lstsq_min_norm(A, b)) <= 1e-12


def test_ne_ratio_degenerate():
    with pytest.raises(DegenerateInputError):
        ne_residual_ratio(from_dense(np.diag([1.0, 0.0])), np.array([0.0, 1.0]), np.zeros(2))


def test_numerical_rank():
    assert numerical_rank(identity(5)) == 5
    assert numerical_rank(gp_matrix(12, 12)) == 64
    assert numerical_rank(from_dense(np.diag([1.0, 1e-20]))) == 1
    assert numerical_rank(from_dense(np.diag([1.0, 1e-20])), tol=0.0) == 2


def test_size_cap():
    big = from_dense(np.eye(600))
    with pytest.raises(ContractError):
        numerical_rank(big)


def test_condition_number_diag():
    assert condition_number(from_dense(np.diag([4.0, 2.0, 0.0]))) == pytest.approx(2.0)


def test_nullspace_component():
    A = from_dense(np.eye(3) + 0.1)
    assert nullspace_component(A, np.ones(3)) == 0.0
    assert nullspace_component(from_dense(np.diag([1.0, 0.0])), np.array([1.0, 1.0])) == pytest.approx(1.0)


def test_nullspace_component_ab_rrgmres():
    A = random_range_symmetric(16, 6, cond=30.0, seed=4)
    b = np.random.Generator(np.random.PCG64(4)).standard_normal(16)
    out = ab_solve(A, RightPreconditioner.at(A), b, SolverOptions(tol_ne=1e-12))
    assert nullspace_component(A, out.x) <= 1e-8 * np.linalg.norm(out.x)


def test_clustering_identity():
    for ell in (1, 2, 3):
        rep = verify_clustering(identity(4), 1.0, ell)
        assert rep.rho_H == pytest.approx(0.0, abs=1e-15)
        np.testing.assert_allclose(rep.eigenvalues, 1.0, atol=1e-15)
        assert rep.passed


def test_clustering_random_full_rank(gen):
    A = random_csr(gen, 10, 6, 0.7)
    rep = verify_clustering(A, 1.0, 2)
    assert rep.n_clustered == 6
    assert rep.n_zero == 4
    assert rep.passed
    assert rep.asymmetry <= 1e-11
    assert rep.shared_spectrum_err <= 1e-8


def test_clustering_gp():
    rep = verify_clustering(gp_matrix(12, 12), 1.0, 1)
    assert rep.rank == 64
    assert (rep.n_clustered, rep.n_zero, rep.n_outside) == (64, 64, 0)


def test_clustering_sweep():
    g = np.random.Generator(np.random.PCG64(77))
    for _ in range(30):
        m, n = int(g.integers(2, 30)), int(g.integers(1, 30))
        A = random_csr(g, m, n)
        omega = float(g.choice([0.5, 1.0, 1.5, 1.9]))
        ell = int(g.integers(1, 5))
        rep = verify_clustering(A, omega, ell)
        assert rep.passed, (m, n, omega, ell, rep)
        assert rep.shared_spectrum_err <= 1e-8


def test_clustering_tightens_with_ell(gen):
    A = random_csr(gen, 14, 8, 0.5)
    spread = []
    for ell in (1, 2, 4):
        rep = verify_clustering(A, 1.0, ell)
        spread.append(np.abs(rep.eigenvalues[: rep.rank] - 1.0).max())
    assert spread[0] >= spread[1] - 1e-12 >= spread[2] - 2e-12


def test_clustering_size_cap():
    with pytest.raises(ContractError):
        verify_clustering(from_dense(np.eye(300)), 1.0, 1)


def test_history_min_and_order():
    h = ConvergenceHistory()
    h.append(1, 1.0, 0.5, 0.0)
    h.append(2, 0.9, 0.1, 0.0)
    h.append(3, 0.8, 0.1, 0.0)
    assert h.min_ne == (0.1, 2)
    with pytest.raises(ContractError):
        h.append(3, 0.7, 0.1, 0.0)


def test_csv_one_row(tmp_path):
    h = ConvergenceHistory()
    h.append(1, 1.0, 0.5, 0.25)
    p = tmp_path / "h.csv"
    export_history_csv(h, p)
    lines = p.read_text().splitlines()
    assert len(lines) == 2
    assert lines[0] == ",".join(CSV_HEADER)
    assert lines[1] == "1,1,0.5,0.25"


def test_csv_timing_off(tmp_path):
    h = ConvergenceHistory()
    h.append(1, 1.0, 0.5, 0.25)
    p = tmp_path / "h.csv"
    export_history_csv(h, p, timing=False)
    assert p.read_text().splitlines()[1] == "1,1,0.5,0"


def test_csv_empty_rejected(tmp_path):
    with pytest.raises(ContractError):
        export_history_csv(ConvergenceHistory(), tmp_path / "h.csv")


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 1e300), st.floats(0, 1e3), st.floats(0, 1e4)), min_size=1, max_size=20))
def test_csv_round_trip(tmp_path_factory, rows):
    h = ConvergenceHistory()
    for k, (res, ne, t) in enumerate(rows, 1):
        h.append(k, res, ne, t)
    p = tmp_path_factory.mktemp("csv") / "h.csv"
    export_history_csv(h, p)
    back = read_history_csv(p)
    assert back.iterations == h.iterations
    assert back.res_norms == h.res_norms
    assert back.ne_ratios == h.ne_ratios
    assert back.elapsed == h.elapsed


def test_gp_history_floor(tmp_path):
    A = gp_matrix()
    b = make_rhs_inconsistent(A, 0.01, 7)
    out = ab_solve(A, RightPreconditioner.nrssor(A), b, SolverOptions(tol_ne=1e-14))
    p = tmp_path / "gp.csv"
    export_history_csv(out.history, p)
    col = np.loadtxt(p, delimiter=",", skiprows=1)[:, 2]
    assert col.min() <= 1e-13
