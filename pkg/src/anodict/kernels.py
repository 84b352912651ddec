"""Mercer kernels, Gram matrices and reduced kernel bases.

A reduced base is a small set of ``p`` signals (or trained atoms) ``B``
standing in for the full training set in feature space: models are built
from ``span{phi(b_1), ..., phi(b_p)}``, so every feature-space object is
represented by a length-``p`` coefficient vector and all geometry flows
through the base Gram ``k(B, B)``.
"""

from dataclasses import dataclass

import numpy as np

from .signals import check_signal_matrix

KERNEL_FAMILIES = ("rbf", "polynomial")

PSD_TOL = 1e-8


@dataclass(frozen=True)
class KernelSpec:
    """A kernel function: ``rbf`` exp(-gamma ||x-y||^2) or
    ``polynomial`` (gamma x.y + alpha)^beta."""

    family: str
    gamma: float
    alpha: float = 1.0
    beta: int = 3

    def __post_init__(self):
        if self.family not in KERNEL_FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.family == "polynomial":
            if int(self.beta) != self.beta or self.beta < 1:
                raise ValueError("beta must be a positive integer")
            if self.alpha < 0:
                raise ValueError("alpha must be nonnegative")


def default_kernel_spec(family, m, synthetic=True, alpha=1.0, beta=3):
    """Default hyperparameters scaled by signal dimension ``m``.

    Synthetic data uses gamma = 1/m for both families; otherwise rbf uses
    0.1/m and polynomial 10/m.
    """
    if synthetic:
        gamma = 1.0 / m
    else:
        gamma = (0.1 if family == "rbf" else 10.0) / m
    return KernelSpec(family, gamma, alpha, beta)


def kernel_eval(spec, x, y):
    """Evaluate the kernel on a single pair of vectors."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ValueError("kernel arguments must have equal dimension")
    if spec.family == "rbf":
        diff = x - y
        return float(np.exp(-spec.gamma * (diff @ diff)))
    return float((spec.gamma * (x @ y) + spec.alpha) ** spec.beta)


def _mirror_upper(K):
    # Exact symmetry: compute each unordered pair once.
    return np.triu(K) + np.triu(K, 1).T


def gram(spec, A_cols, B_cols=None):
    """Gram matrix with entry (i, j) = k(A[:, i], B[:, j]).

    Pass ``B_cols=None`` for a self-Gram; the result is then exactly
    symmetric.
    """
    # Canonical memory layout: BLAS picks different summation orders for
    # C- and F-contiguous operands, and a Gram must not depend on where
    # its operands came from (fit-time vs. reloaded-model arrays).
    A = np.ascontiguousarray(check_signal_matrix(A_cols, name="A_cols"))
    self_gram = B_cols is None
    B = A if self_gram else np.ascontiguousarray(check_signal_matrix(B_cols, name="B_cols"))
    if A.shape[0] != B.shape[0]:
        raise ValueError("columns of both matrices must share a dimension")
    inner = A.T @ B
    if spec.family == "rbf":
        sq_a = np.sum(A * A, axis=0)
        sq_b = sq_a if self_gram else np.sum(B * B, axis=0)
        sq_dist = np.maximum(sq_a[:, None] + sq_b[None, :] - 2.0 * inner, 0.0)
        K = np.exp(-spec.gamma * sq_dist)
    else:
        K = (spec.gamma * inner + spec.alpha) ** spec.beta
    if self_gram:
        K = _mirror_upper(K)
    return K


def kernel_diagonal(spec, Y):
    """Vector of k(y_l, y_l) for every column of ``Y``."""
    Y = check_signal_matrix(Y)
    if spec.family == "rbf":
        return np.ones(Y.shape[1])
    sq = np.sum(Y * Y, axis=0)
    return (spec.gamma * sq + spec.alpha) ** spec.beta


@dataclass
class KernelBase:
    """A reduced kernel base: its signals, self-Gram and provenance kind.

    ``kind`` is ``"sampled"`` when the base is a column sample of the
    training set and ``"trained_dict"`` when it is a dictionary trained by
    linear dictionary learning.
    """

    signals: np.ndarray
    gram: np.ndarray
    kind: str

    @property
    def size(self):
        return self.signals.shape[1]


def make_kernel_base(spec, signals, kind):
    """Build a KernelBase, checking the Gram is positive semidefinite."""
    if kind not in ("sampled", "trained_dict"):
        raise ValueError(f"unknown base kind {kind!r}")
    signals = np.ascontiguousarray(check_signal_matrix(signals, name="base signals"))
    K = gram(spec, signals)
    min_eig = float(np.linalg.eigvalsh(K)[0])
    if min_eig < -PSD_TOL * np.trace(K):
        raise ValueError(f"base Gram is not positive semidefinite (min eigenvalue {min_eig:.3e})")
    return KernelBase(signals=signals, gram=K, kind=kind)
