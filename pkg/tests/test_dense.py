import numpy as np
import pytest

from rrkrylov.dense import (
    CholeskyFailure,
    cholesky,
    dense_svd,
    dense_symmetric_eig,
    hessenberg_least_squares,
    rank_tolerance,
)
from rrkrylov.errors import ContractError
from rrkrylov.problems import gp_matrix_dense


def test_eig_diag():
    w, _ = dense_symmetric_eig(np.diag([1.0, 3.0]))
    np.testing.assert_allclose(w, [3.0, 1.0])


def test_eig_swap():
    w, _ = dense_symmetric_eig([[0.0, 1.0], [1.0, 0.0]])
    np.testing.assert_allclose(w, [1.0, -1.0], atol=1e-15)


def test_eig_spd_positive(gen):
    G = gen.standard_normal((8, 8))
    w, _ = dense_symmetric_eig(G.T @ G)
    assert np.all(w > 0)


def test_eig_rejects_asymmetric():
    with pytest.raises(ContractError):
        dense_symmetric_eig([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(ContractError):
        dense_symmetric_eig(np.ones((2, 3)))


def test_reconstruction_sweep():
    g = np.random.Generator(np.random.PCG64(99))
    for _ in range(100):
        n = int(g.integers(1, 65))
        m = int(g.integers(1, 65))
        X = g.standard_normal((n, n))
        S = X + X.T
        w, V = dense_symmetric_eig(S)
        assert np.abs(V @ np.diag(w) @ V.T - S).max() <= 1e-12 * max(np.abs(S).max(), 1.0) * n
        assert np.abs(V.T @ V - np.eye(n)).max() <= 1e-12 * n
        M = g.standard_normal((m, n))
        U, s, W = dense_svd(M)
        assert np.abs(U @ np.diag(s) @ W.T - M).max() <= 1e-12 * max(s[0], 1.0) * max(m, n)
        assert np.all(np.diff(s) <= 0)


def test_svd_trivial():
    np.testing.assert_allclose(dense_svd(np.eye(4))[1], np.ones(4))
    np.testing.assert_allclose(dense_svd(np.diag([2.0, 0.0]))[1], [2.0, 0.0])


def test_svd_gp_condition():
    s = dense_svd(gp_matrix_dense(12, 12))[1]
    kappa = s[0] / s[63]
    assert 2.29e12 / 1.05 <= kappa <= 2.29e12 * 1.05


def test_rank_tolerance_formula():
    assert rank_tolerance(np.array([4.0, 1.0]), (3, 7)) == 7 * 2.0**-52 * 4.0


def test_cholesky_identity():
    np.testing.assert_array_equal(cholesky(np.eye(3)), np.eye(3))


def test_cholesky_forced():
    np.testing.assert_allclose(cholesky([[4.0, 2.0], [2.0, 2.0]]), [[2.0, 0.0], [1.0, 1.0]])


def test_cholesky_failure_value():
    out = cholesky([[1.0, 2.0], [2.0, 1.0]])
    assert isinstance(out, CholeskyFailure)
    assert out.pivot == 2
    assert not out


def test_hessenberg_ls_trivial():
    y, res = hessenberg_least_squares([[1.0], [0.0]], [2.0, 0.0])
    np.testing.assert_allclose(y, [2.0])
    assert res == 0.0
    y, res = hessenberg_least_squares([[1.0], [0.0]], [0.0, 3.0])
    np.testing.assert_allclose(y, [0.0])
    assert res == pytest.approx(3.0)


def test_hessenberg_ls_zero_pivot():
    y, res = hessenberg_least_squares([[0.0], [0.0]], [2.0, 0.0])
    np.testing.assert_array_equal(y, [0.0])
    assert res == pytest.approx(2.0)


def test_hessenberg_ls_normal_equations(gen):
    H = np.triu(gen.standard_normal((6, 5)), -1)
    g = gen.standard_normal(6)
    y, res = hessenberg_least_squares(H, g)
    ref = np.linalg.solve(H.T @ H, H.T @ g)
    np.testing.assert_allclose(y, ref, atol=1e-10)
    assert res == pytest.approx(np.linalg.norm(H @ ref - g), rel=1e-10)


def test_hessenberg_ls_shape_checks():
    with pytest.raises(ContractError):
        hessenberg_least_squares(np.ones((3, 1)), np.ones(3))
    with pytest.raises(ContractError):
        hessenberg_least_squares(np.ones((3, 2)), np.ones(3))
