"""Tests for kernel evaluation, Gram construction and the reduced base."""

import numpy as np
import pytest

from anodict.kernels import (
    KernelSpec,
    default_kernel_spec,
    gram,
    kernel_diagonal,
    kernel_eval,
    make_kernel_base,
)


def rbf_oracle(x, y, g):
    d = x - y
    return np.exp(-g * float(d @ d))


def poly_oracle(x, y, g, a, b):
    return (g * float(x @ y) + a) ** b


def test_kernel_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec("sigmoid", gamma=0.1)
    with pytest.raises(ValueError):
        KernelSpec("rbf", gamma=0.0)
    with pytest.raises(ValueError):
        KernelSpec("polynomial", gamma=0.1, beta=0)
    with pytest.raises(ValueError):
        KernelSpec("polynomial", gamma=0.1, alpha=-1.0)
    KernelSpec("polynomial", gamma=0.1, alpha=0.0, beta=2)


def test_default_kernel_spec_scaling():
    assert default_kernel_spec("rbf", 64, synthetic=True).gamma == 1.0 / 64
    assert default_kernel_spec("polynomial", 64, synthetic=True).gamma == 1.0 / 64
    assert default_kernel_spec("rbf", 50, synthetic=False).gamma == 0.1 / 50
    assert default_kernel_spec("polynomial", 50, synthetic=False).gamma == 10.0 / 50
    spec = default_kernel_spec("polynomial", 10, alpha=2.0, beta=2)
    assert spec.alpha == 2.0 and spec.beta == 2


def test_kernel_eval_matches_oracles():
    rng = np.random.default_rng(0)
    x, y = rng.standard_normal(7), rng.standard_normal(7)
    assert abs(kernel_eval(KernelSpec("rbf", 0.3), x, y) - rbf_oracle(x, y, 0.3)) < 1e-14
    spec = KernelSpec("polynomial", 0.2, alpha=1.5, beta=3)
    assert abs(kernel_eval(spec, x, y) - poly_oracle(x, y, 0.2, 1.5, 3)) < 1e-12
    with pytest.raises(ValueError):
        kernel_eval(spec, np.ones(3), np.ones(4))


def test_gram_entries_match_entrywise_evaluation():
    rng = np.random.default_rng(1)
    A = rng.standard_normal((5, 4))
    B = rng.standard_normal((5, 6))
    for spec in (KernelSpec("rbf", 0.7), KernelSpec("polynomial", 0.4, alpha=0.5, beta=2)):
        K = gram(spec, A, B)
        assert K.shape == (4, 6)
        for i in range(4):
            for j in range(6):
                assert abs(K[i, j] - kernel_eval(spec, A[:, i], B[:, j])) < 1e-12


def test_self_gram_exactly_symmetric():
    rng = np.random.default_rng(2)
    A = rng.standard_normal((6, 9))
    for spec in (KernelSpec("rbf", 1.3), KernelSpec("polynomial", 0.9, beta=3)):
        K = gram(spec, A)
        assert np.array_equal(K, K.T)


def test_rbf_gram_diagonal_is_ones_and_entries_in_unit_interval():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((4, 8))
    K = gram(KernelSpec("rbf", 0.5), A)
    assert np.array_equal(np.diag(K), np.ones(8))
    assert np.all((K > 0) & (K <= 1))


def test_kernel_diagonal_oracle():
    rng = np.random.default_rng(4)
    Y = rng.standard_normal((5, 7))
    assert np.array_equal(kernel_diagonal(KernelSpec("rbf", 0.2), Y), np.ones(7))
    spec = KernelSpec("polynomial", 0.3, alpha=1.0, beta=2)
    diag = kernel_diagonal(spec, Y)
    for l in range(7):
        assert abs(diag[l] - kernel_eval(spec, Y[:, l], Y[:, l])) < 1e-12


def test_gram_dimension_mismatch():
    with pytest.raises(ValueError):
        gram(KernelSpec("rbf", 1.0), np.ones((3, 2)), np.ones((4, 2)))


def test_make_kernel_base_builds_psd_gram():
    rng = np.random.default_rng(5)
    signals = rng.standard_normal((6, 10))
    base = make_kernel_base(KernelSpec("rbf", 0.5), signals, "sampled")
    assert base.size == 10
    assert base.kind == "sampled"
    assert np.array_equal(base.gram, gram(KernelSpec("rbf", 0.5), signals))
    eigs = np.linalg.eigvalsh(base.gram)
    assert eigs[0] >= -1e-8 * np.trace(base.gram)


def test_make_kernel_base_with_duplicate_columns_stays_psd():
    # duplicated signals make the Gram exactly rank-deficient; the PSD
    # guard must accept it (eigenvalues >= -tol), not reject it
    rng = np.random.default_rng(6)
    signals = rng.standard_normal((5, 4))
    doubled = np.concatenate([signals, signals], axis=1)
    base = make_kernel_base(KernelSpec("rbf", 0.8), doubled, "sampled")
    assert base.size == 8


def test_make_kernel_base_rejects_unknown_kind():
    with pytest.raises(ValueError):
        make_kernel_base(KernelSpec("rbf", 1.0), np.ones((3, 2)), "nystrom")
