import numpy as np
import pytest

from rrkrylov.analysis import condition_number, numerical_rank, singular_values, structural_rank
from rrkrylov.errors import ContractError, DegenerateInputError
from rrkrylov.problems import (
    RHS,
    Family,
    ProblemSpec,
    gp_alphas,
    gp_betas,
    gp_matrix,
    index2_matrix,
    jordan_block,
    make_rhs_inconsistent,
    random_range_symmetric,
    uniform_vector,
)
from rrkrylov.sparse import from_dense, write_matrix_market


def _rank(M):
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > max(M.shape) * 2.0**-52 * s[0]))


def test_jordan_blocks():
    np.testing.assert_array_equal(jordan_block(1, 3.0), [[3.0]])
    np.testing.assert_array_equal(jordan_block(2, 0.0), [[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(ContractError):
        jordan_block(0, 1.0)


def test_decay_sequences():
    a, b = gp_alphas(12), gp_betas(12)
    assert a[0] == 1.0 and a[-1] == 1e-12 and a.size == 16
    assert b[0] == 1.0 and b[-1] == 1e-12 and b.size == 32
    assert np.all(np.diff(a) < 0) and np.all(np.diff(b) < 0)


def test_gp_rank_and_condition():
    A = gp_matrix(12, 12)
    assert A.shape == (128, 128)
    assert numerical_rank(A) == 64
    assert 2.29e12 / 1.05 <= condition_number(A) <= 2.29e12 * 1.05


def _power_ranks(Ad, k):
    # powers squash singular values below any tolerance (alpha^2 ~ 1e-24), so
    # the index is read from exact structure: structural rank of exact products
    out, P = [], np.eye(Ad.shape[0])
    for _ in range(k):
        P = P @ Ad
        out.append(structural_rank(from_dense(P)))
    return out


def test_gp_is_group_matrix():
    Ad = gp_matrix(12, 12).to_dense()
    r = _rank(Ad)
    A11 = Ad[:64, :64]
    # A11 upper triangular with nonzero diagonal, so it is nonsingular and
    # R(A) and N(A) intersect trivially: rank(A^2) = rank(A)
    assert np.all(np.tril(A11, -1) == 0) and np.all(np.diag(A11) != 0)
    assert _power_ranks(Ad, 2) == [64, 64]
    # R(A) is spanned by the first 64 unit vectors; R(A^T) is not
    U = np.linalg.svd(Ad.T)[0][:, :r]
    assert np.linalg.norm(U[64:]) > 1e-3


def test_index2_rank_and_index():
    A = index2_matrix(12, 15)
    assert numerical_rank(A) == 72
    assert structural_rank(A) == 80
    assert 4.01e12 / 1.05 <= condition_number(A) <= 4.01e12 * 1.05
    r1, r2, r3 = _power_ranks(A.to_dense(), 3)
    assert r2 == r3 < r1


def test_generators_deterministic():
    assert gp_matrix(12, 12).equals(gp_matrix(12, 12))
    assert index2_matrix(10, 14).equals(index2_matrix(10, 14))
    assert random_range_symmetric(10, 4, seed=3).equals(random_range_symmetric(10, 4, seed=3))
    np.testing.assert_array_equal(uniform_vector(50, 9), uniform_vector(50, 9))
    assert not np.array_equal(uniform_vector(50, 9), uniform_vector(50, 10))


def test_uniform_vector_range():
    u = uniform_vector(1000, 0)
    assert u.min() >= 0.0 and u.max() < 1.0


def test_uniform_vector_frozen_values():
    # PCG64 stream is part of the reproducibility contract
    np.testing.assert_array_equal(
        uniform_vector(3, 0), [0.6369616873214543, 0.2697867137638703, 0.04097352393619469]
    )


def test_rhs_noise_free_is_consistent():
    A = gp_matrix()
    b = make_rhs_inconsistent(A, noise=0.0)
    Ad = A.to_dense()
    x = np.linalg.lstsq(Ad, b, rcond=None)[0]
    assert np.linalg.norm(Ad @ x - b) < 1e-10


@pytest.mark.parametrize("seed", [0, 1, 7, 123])
def test_rhs_noise_norm(seed):
    A = gp_matrix()
    b = make_rhs_inconsistent(A, 0.01, seed)
    a1 = A @ np.ones(128)
    assert np.linalg.norm(b - a1 / np.linalg.norm(a1)) == pytest.approx(0.01, rel=1e-12)


def test_rhs_gp_inconsistent():
    A = gp_matrix()
    b = make_rhs_inconsistent(A, 0.01, 0)
    U = np.linalg.svd(A.to_dense())[0]
    perp = np.linalg.norm(U[:, 64:].T @ b)
    assert 0.0 < perp <= 0.01


def test_rhs_degenerate():
    with pytest.raises(DegenerateInputError):
        make_rhs_inconsistent(from_dense(np.array([[1.0, -1.0]])))


def test_random_range_symmetric():
    A = random_range_symmetric(12, 5, cond=100.0, seed=1)
    s = singular_values(A)
    assert numerical_rank(A) == 5
    assert s[0] == pytest.approx(1.0) and s[4] == pytest.approx(0.01)
    Ad = A.to_dense()
    # R(A) = R(A^T): projectors agree
    U, _, Vt = np.linalg.svd(Ad)
    np.testing.assert_allclose(U[:, :5] @ U[:, :5].T, Vt[:5].T @ Vt[:5], atol=1e-10)
    assert numerical_rank(random_range_symmetric(6, 6, seed=2)) == 6


def test_problem_spec_build(tmp_path):
    spec = ProblemSpec(Family.INDEX2, rho=12, gamma=15, seed=4)
    A, b = spec.build()
    assert A.equals(index2_matrix(12, 15))
    np.testing.assert_array_equal(b, make_rhs_inconsistent(A, 0.01, 4))
    p = tmp_path / "a.mtx"
    write_matrix_market(A, p)
    B, c = ProblemSpec(Family.MATRIX_MARKET, path=str(p), seed=4).build()
    assert B.equals(A)
    np.testing.assert_array_equal(c, uniform_vector(128, 4))
    _, d = ProblemSpec(Family.MATRIX_MARKET, path=str(p), seed=4, rhs=RHS.INCONSISTENT).build()
    np.testing.assert_array_equal(d, b)


def test_problem_spec_validation():
    with pytest.raises(ContractError):
        ProblemSpec(Family.MATRIX_MARKET)
    with pytest.raises(ContractError):
        ProblemSpec(Family.GP, rho=-1)
