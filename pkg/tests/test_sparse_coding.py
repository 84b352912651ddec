"""Tests for OMP and the SparseCode container.

The greedy oracle below re-implements atom selection with plain lstsq
calls so the library path (Cholesky on the support Gram) is checked
against an independent computation.
"""

import numpy as np
import pytest

from anodict.errors import SingularSubproblemError
from anodict.signals import normalize_columns
from anodict.sparse_coding import (
    SparseCode,
    _solve_spd,
    batch_code,
    omp,
    representation_errors,
)


def greedy_omp_oracle(D, y, sparsity):
    """Replay OMP with lstsq: argmax |D^T r|, first index on ties."""
    support = []
    coeffs = np.zeros(0)
    residual = y.copy()
    for _ in range(sparsity):
        corr = np.abs(D.T @ residual)
        corr[support] = -1.0
        j = int(np.argmax(corr))
        if corr[j] <= 0.0:
            break
        support.append(j)
        coeffs, *_ = np.linalg.lstsq(D[:, support], y, rcond=None)
        residual = y - D[:, support] @ coeffs
    return np.asarray(support), coeffs, float(np.linalg.norm(residual))


def random_dictionary(rng, m, n):
    return normalize_columns(rng.standard_normal((m, n)))


def test_omp_matches_greedy_replay_oracle():
    rng = np.random.default_rng(42)
    for trial in range(30):
        m = int(rng.integers(6, 20))
        n = int(rng.integers(4, 25))
        s = int(rng.integers(1, min(m, n, 6) + 1))
        D = random_dictionary(rng, m, n)
        y = rng.standard_normal(m)
        supp, coef, rnorm = omp(D, y, s)
        o_supp, o_coef, o_rnorm = greedy_omp_oracle(D, y, s)
        assert np.array_equal(supp, o_supp), f"trial {trial}: support diverged"
        assert np.allclose(coef, o_coef, atol=1e-10)
        assert abs(rnorm - o_rnorm) < 1e-10


def test_omp_exact_recovery_of_sparse_signals():
    # signals built from 3 atoms of a 16x20 dictionary are recovered exactly
    rng = np.random.default_rng(7)
    D = random_dictionary(rng, 16, 20)
    for _ in range(25):
        true_supp = rng.choice(20, size=3, replace=False)
        true_coef = rng.standard_normal(3) + np.sign(rng.standard_normal(3))
        y = D[:, true_supp] @ true_coef
        supp, coef, rnorm = omp(D, y, 3)
        assert set(supp.tolist()) == set(true_supp.tolist())
        assert rnorm < 1e-10
        dense = np.zeros(20)
        dense[supp] = coef
        expected = np.zeros(20)
        expected[true_supp] = true_coef
        assert np.allclose(dense, expected, atol=1e-9)


def test_omp_orthonormal_dictionary_closed_form():
    # with orthonormal atoms, OMP keeps the s largest |d_j^T y| and the
    # residual energy is the sum of the dropped squared projections
    rng = np.random.default_rng(3)
    Q, _ = np.linalg.qr(rng.standard_normal((8, 6)))
    y = rng.standard_normal(8)
    proj = Q.T @ y
    s = 3
    supp, coef, rnorm = omp(Q, y, s)
    top = np.argsort(-np.abs(proj))[:s]
    assert set(supp.tolist()) == set(top.tolist())
    assert np.allclose(np.sort(coef), np.sort(proj[top]), atol=1e-12)
    kept = np.sum(proj[top] ** 2)
    expected = np.sqrt(y @ y - kept)
    assert abs(rnorm - expected) < 1e-10


def test_omp_residual_monotone_in_sparsity():
    rng = np.random.default_rng(11)
    D = random_dictionary(rng, 10, 14)
    for _ in range(20):
        y = rng.standard_normal(10)
        norms = [omp(D, y, s)[2] for s in range(1, 9)]
        assert all(a >= b - 1e-12 for a, b in zip(norms, norms[1:]))


def test_omp_residual_orthogonal_to_support():
    rng = np.random.default_rng(13)
    D = random_dictionary(rng, 12, 18)
    y = rng.standard_normal(12)
    supp, coef, _ = omp(D, y, 5)
    residual = y - D[:, supp] @ coef
    assert np.max(np.abs(D[:, supp].T @ residual)) < 1e-10


def test_omp_early_stop_on_exact_atom():
    rng = np.random.default_rng(5)
    D = random_dictionary(rng, 9, 12)
    y = 2.5 * D[:, 4]
    supp, coef, rnorm = omp(D, y, 4, residual_tol=1e-9)
    assert supp.tolist() == [4]
    assert abs(coef[0] - 2.5) < 1e-12
    assert rnorm < 1e-9


def test_omp_input_validation():
    D = random_dictionary(np.random.default_rng(0), 5, 6)
    y = np.zeros(5)
    with pytest.raises(ValueError):
        omp(D, np.zeros(4), 2)
    with pytest.raises(ValueError):
        omp(D, y, 0)
    with pytest.raises(ValueError):
        omp(D, y, 7)


def test_omp_zero_signal_returns_empty_support():
    D = random_dictionary(np.random.default_rng(1), 5, 6)
    supp, coef, rnorm = omp(D, np.zeros(5), 3)
    assert supp.size == 0 and coef.size == 0
    assert rnorm == 0.0


def test_solve_spd_raises_on_degenerate_system():
    with pytest.raises(SingularSubproblemError):
        _solve_spd(np.zeros((1, 1)), np.ones(1))


def test_sparse_code_validation():
    with pytest.raises(ValueError):
        SparseCode([[0, 0]], [[1.0, 2.0]], n_atoms=4, sparsity=2)  # repeated atom
    with pytest.raises(ValueError):
        SparseCode([[0, 1, 2]], [[1.0, 2.0, 3.0]], n_atoms=4, sparsity=2)  # too many
    with pytest.raises(ValueError):
        SparseCode([[4]], [[1.0]], n_atoms=4, sparsity=2)  # out of range
    with pytest.raises(ValueError):
        SparseCode([[0]], [[np.inf]], n_atoms=4, sparsity=2)


def test_sparse_code_to_dense_and_atom_users():
    code = SparseCode(
        [[0, 2], [1], [2, 0]],
        [[1.0, -2.0], [3.0], [4.0, 5.0]],
        n_atoms=3,
        sparsity=2,
    )
    X = code.to_dense()
    assert X.shape == (3, 3)
    assert X[0, 0] == 1.0 and X[2, 0] == -2.0 and X[1, 1] == 3.0
    assert X[2, 2] == 4.0 and X[0, 2] == 5.0
    users = code.atom_users()
    assert users[0].tolist() == [0, 2]
    assert users[1].tolist() == [1]
    assert users[2].tolist() == [0, 2]


def test_sparse_code_select_columns_copies():
    code = SparseCode([[0], [1]], [[1.0], [2.0]], n_atoms=2, sparsity=1)
    sub = code.select_columns([1])
    sub.coeffs[0][0] = 99.0
    assert code.coeffs[1][0] == 2.0


def test_sparse_code_replace_coeffs_from_dense():
    code = SparseCode([[0, 1], [1]], [[1.0, 1.0], [1.0]], n_atoms=2, sparsity=2)
    X = np.array([[7.0, 0.0], [8.0, 9.0]])
    code.replace_coeffs_from_dense(X)
    assert code.coeffs[0].tolist() == [7.0, 8.0]
    assert code.coeffs[1].tolist() == [9.0]


def test_batch_code_agrees_with_per_column_omp():
    rng = np.random.default_rng(21)
    D = random_dictionary(rng, 8, 12)
    Y = rng.standard_normal((8, 7))
    code = batch_code(D, Y, 3)
    assert code.n_signals == 7
    for l in range(7):
        supp, coef, _ = omp(D, Y[:, l], 3)
        assert np.array_equal(code.supports[l], supp)
        assert np.allclose(code.coeffs[l], coef, atol=1e-12)


def test_representation_errors_match_manual_norms():
    rng = np.random.default_rng(23)
    D = random_dictionary(rng, 8, 12)
    Y = rng.standard_normal((8, 6))
    code = batch_code(D, Y, 2)
    errs = representation_errors(D, Y, code=code)
    for l in range(6):
        approx = D[:, code.supports[l]] @ code.coeffs[l]
        assert abs(errs[l] - np.linalg.norm(Y[:, l] - approx)) < 1e-12
    # the code=None path recodes internally and must agree
    errs2 = representation_errors(D, Y, sparsity=2)
    assert np.allclose(errs, errs2, atol=0)


def test_representation_errors_requires_code_or_sparsity():
    D = random_dictionary(np.random.default_rng(2), 4, 5)
    with pytest.raises(ValueError):
        representation_errors(D, np.ones((4, 2)))
