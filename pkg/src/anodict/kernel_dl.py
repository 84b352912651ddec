"""Reduced kernel dictionary learning.

Signals are modelled in feature space as ``phi(y) ~ phi(B) A x`` where
``B`` is a small reduced base (sampled signals or a trained linear
dictionary), ``A`` holds one coefficient column per kernel atom and ``x``
is sparse.  Everything is computed through the base self-Gram
``Kbar = k(B, B)`` and the cross Gram ``Khat = k(Y, B)``; no feature-space
vector is ever formed.  Training alternates kernel OMP coding with
per-atom coefficient updates, with the same optional subset selection and
worst-representation dropout as the linear trainer.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .dict_learning import DlConfig, drop_worst, select_train_indices, train_dl
from .errors import SingularKernelError, SingularSubproblemError, TooFewSignalsError
from .kernels import KernelBase, KernelSpec, gram, kernel_diagonal, make_kernel_base
from .signals import (
    ZERO_NORM_TOL,
    ceil_count,
    check_dictionary,
    check_signal_matrix,
    derive_seed,
    round_half_up,
    seed_stream,
)
from .sparse_coding import SparseCode, _solve_spd

KERNEL_JITTER = 1e-10

# Allowed relative undershoot of the residual energy before clamping;
# anything below this signals an inconsistency, not roundoff.
ERR2_UNDERSHOOT_TOL = 1e-8


@dataclass
class KernelDictionary:
    """Kernel atoms as coefficient columns over a reduced base.

    Column ``j`` of ``coefficients`` represents the atom
    ``phi(base.signals) @ coefficients[:, j]``, normalized so that
    ``a^T Kbar a = 1``.
    """

    coefficients: np.ndarray
    base: KernelBase

    @property
    def n_atoms(self):
        return self.coefficients.shape[1]

    def feature_norms(self):
        """Feature-space norm of every atom (should be 1)."""
        A = self.coefficients
        return np.sqrt(np.einsum("ij,ij->j", A, self.base.gram @ A))


@dataclass(frozen=True)
class KdlConfig:
    """Hyperparameters for ``train_rkdl``.

    ``base_fraction`` sizes the reduced base relative to the training set;
    ``base_kind`` picks how the base is built: ``"sampled"`` draws random
    training columns, ``"trained_dict"`` runs linear dictionary learning
    first and uses its atoms.
    """

    kernel: KernelSpec
    n_atoms: int = 50
    sparsity: int = 5
    iterations: int = 20
    train_perc: float = 1.0
    train_drop_perc: float = 0.0
    base_fraction: float = 0.10
    base_kind: str = "sampled"
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.kernel, KernelSpec):
            raise ValueError("kernel must be a KernelSpec")
        if self.n_atoms < 1:
            raise ValueError("n_atoms must be >= 1")
        if not 1 <= self.sparsity <= self.n_atoms:
            raise ValueError("sparsity must be in [1, n_atoms]")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0.0 < self.train_perc <= 1.0:
            raise ValueError("train_perc must be in (0, 1]")
        if not 0.0 <= self.train_drop_perc < 1.0:
            raise ValueError("train_drop_perc must be in [0, 1)")
        if not 0.0 < self.base_fraction <= 1.0:
            raise ValueError("base_fraction must be in (0, 1]")
        if self.base_kind not in ("sampled", "trained_dict"):
            raise ValueError(f"unknown base kind {self.base_kind!r}")

    def validate_signal_count(self, n_signals):
        remaining = ceil_count(n_signals * self.train_perc * (1.0 - self.train_drop_perc))
        if remaining < self.n_atoms:
            raise TooFewSignalsError(
                f"{n_signals} signals leave {remaining} after selection/dropout, "
                f"need at least {self.n_atoms}"
            )


def _coeff_matrix(A):
    if isinstance(A, KernelDictionary):
        return A.coefficients
    return np.asarray(A, dtype=np.float64)


def _kernel_factor(Kbar, context="kernel gram"):
    """Cholesky of a base Gram, escalating jitter up to three times."""
    p = Kbar.shape[0]
    try:
        return cho_factor(Kbar, lower=True)
    except np.linalg.LinAlgError:
        pass
    jitter = KERNEL_JITTER * np.trace(Kbar) / p
    eye = np.eye(p)
    for _ in range(3):
        try:
            return cho_factor(Kbar + jitter * eye, lower=True)
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise SingularKernelError(f"{context}: Gram stayed singular after jitter escalation")


def _komp_core(G, u, k_yy, sparsity, context="kernel omp"):
    """Greedy selection over atom correlations in feature space.

    ``G = A^T Kbar A`` and ``u = A^T k_y`` carry all the geometry; the
    squared residual of a support ``S`` with coefficients ``x`` is
    ``k_yy - 2 x.u_S + x.G_SS x``.
    """
    support = []
    coeffs = np.zeros(0)
    err2 = float(k_yy)
    for _ in range(sparsity):
        if err2 <= 0.0:
            break
        corr = np.abs(u - G[:, support] @ coeffs) if support else np.abs(u)
        if support:
            corr[support] = -1.0
        j = int(np.argmax(corr))
        if corr[j] <= 0.0:
            break
        support.append(j)
        G_ss = G[np.ix_(support, support)]
        u_s = u[support]
        coeffs = _solve_spd(G_ss, u_s, context=f"{context}, support {support}")
        err2 = float(k_yy - 2.0 * (coeffs @ u_s) + coeffs @ (G_ss @ coeffs))
    if err2 < -ERR2_UNDERSHOOT_TOL * max(float(k_yy), 1e-300):
        raise ValueError(f"{context}: residual energy {err2:.3e} below roundoff tolerance")
    return np.asarray(support, dtype=np.int64), np.asarray(coeffs, dtype=np.float64), err2


def kernel_omp(base, A, k_y, k_yy, sparsity):
    """Code one signal, given its kernel values against the base.

    Parameters
    ----------
    base : KernelBase
    A : KernelDictionary or ndarray (p, n)
        Kernel atom coefficients.
    k_y : ndarray (p,)
        ``k(b_i, y)`` for every base column.
    k_yy : float
        ``k(y, y)``.
    sparsity : int

    Returns
    -------
    (support, coeffs, err2)
        Selected atoms, their coefficients, and the squared feature-space
        residual, clamped at zero.
    """
    A = _coeff_matrix(A)
    k_y = np.asarray(k_y, dtype=np.float64).ravel()
    if k_y.shape[0] != base.size:
        raise ValueError(f"k_y has {k_y.shape[0]} entries, base has {base.size}")
    if not 1 <= sparsity <= A.shape[1]:
        raise ValueError(f"sparsity must be in [1, {A.shape[1]}]")
    G = A.T @ (base.gram @ A)
    u = A.T @ k_y
    support, coeffs, err2 = _komp_core(G, u, float(k_yy), sparsity)
    return support, coeffs, max(err2, 0.0)


def batch_kernel_code(base, A, signal_gram, kernel_diag, sparsity):
    """Code a batch of signals given their Gram rows against the base.

    ``signal_gram`` is ``k(Y, B)`` with one row per signal and
    ``kernel_diag`` the per-signal ``k(y, y)``.  Returns a SparseCode and
    the per-signal squared residuals (clamped at zero).
    """
    A = _coeff_matrix(A)
    signal_gram = np.asarray(signal_gram, dtype=np.float64)
    kernel_diag = np.asarray(kernel_diag, dtype=np.float64).ravel()
    G = A.T @ (base.gram @ A)
    U = signal_gram @ A
    supports, coeffs, err2 = [], [], np.zeros(signal_gram.shape[0])
    for l in range(signal_gram.shape[0]):
        try:
            supp, coef, e2 = _komp_core(G, U[l], kernel_diag[l], sparsity)
        except SingularSubproblemError as exc:
            raise SingularSubproblemError(f"column {l}: {exc}") from exc
        supports.append(supp)
        coeffs.append(coef)
        err2[l] = max(e2, 0.0)
    return SparseCode(supports, coeffs, A.shape[1], sparsity), err2


def _reduced_pass(kernel_gram, signal_gram, A, code, atom_indices, context):
    """Shared per-atom update sweep for both base kinds.

    For atom ``j`` with user columns ``I`` and active row ``x``, the
    error complement in base coordinates is ``W = A X[:, I] - a_j x``;
    the unnormalized optimum solves ``(||x||^2 Kbar) a = Khat_I^T x -
    Kbar W x``, the atom is rescaled to unit feature norm, and the row
    becomes ``Khat_I a - W^T Kbar a``.  Atoms with no users or an all-zero
    row are skipped; supports never change.
    """
    Kbar = np.asarray(kernel_gram, dtype=np.float64)
    Khat = np.asarray(signal_gram, dtype=np.float64)
    A = np.array(_coeff_matrix(A))
    if code.n_signals != Khat.shape[0]:
        raise ValueError("code does not match the signal Gram rows")
    if code.n_atoms != A.shape[1]:
        raise ValueError("code does not match the coefficient matrix")
    X = code.to_dense()
    users = code.atom_users()
    factor = _kernel_factor(Kbar, context=context)
    order = range(A.shape[1]) if atom_indices is None else atom_indices
    for j in order:
        cols = users[j]
        if cols.size == 0:
            continue
        x_row = X[j, cols]
        xnorm2 = float(x_row @ x_row)
        if xnorm2 <= 0.0:
            continue
        W = A @ X[:, cols] - np.outer(A[:, j], x_row)
        Kh = Khat[cols, :]
        rhs = Kh.T @ x_row - Kbar @ (W @ x_row)
        atom = cho_solve(factor, rhs) / xnorm2
        scale2 = float(atom @ (Kbar @ atom))
        if scale2 <= ZERO_NORM_TOL:
            continue
        atom = atom / math.sqrt(scale2)
        A[:, j] = atom
        Ka = Kbar @ atom
        X[j, cols] = Kh @ atom - W.T @ Ka
    out = code.select_columns(np.arange(code.n_signals))
    out.replace_coeffs_from_dense(X)
    return A, out


def rkdl_s_pass(kernel_gram, signal_gram, A, code, atom_indices=None):
    """One update sweep for a sampled-signal base.

    The modelled error is ``phi(Y) (I - P A X)`` with ``P`` embedding the
    sampled base columns; contracting with the Grams reduces every update
    to base coordinates, which is what this sweep computes.

    Returns the updated coefficient matrix and code.
    """
    return _reduced_pass(kernel_gram, signal_gram, A, code, atom_indices, "sampled-base pass")


def rkdl_d_pass(kernel_gram, signal_gram, A, code, atom_indices=None):
    """One update sweep for a trained-dictionary base.

    Derived from the error ``phi(Y) - phi(Dbar) A X`` via the cumulated
    representation ``S = X^T A^T`` and its per-atom complement
    ``R = S - X_j a_j^T``; with coefficient updates restricted to each
    atom's support the stationary conditions coincide with the
    sampled-base sweep, so both share one implementation.
    """
    return _reduced_pass(kernel_gram, signal_gram, A, code, atom_indices, "trained-base pass")


def _init_coefficients(base, n_atoms, rng):
    """Random atoms, normalized to unit feature norm against the base Gram."""
    p = base.size
    A = rng.standard_normal((p, n_atoms))
    for _ in range(100):
        q = np.einsum("ij,ij->j", A, base.gram @ A)
        bad = np.flatnonzero(q <= ZERO_NORM_TOL)
        if bad.size == 0:
            return A / np.sqrt(q)
        A[:, bad] = rng.standard_normal((p, bad.size))
    raise SingularKernelError("could not draw kernel atoms with nonzero feature norm")


def train_rkdl(Y, cfg, pre_trained=None):
    """Train a reduced kernel dictionary.

    Parameters
    ----------
    Y : ndarray (m, N)
        Training signals with unit-norm columns.
    cfg : KdlConfig
    pre_trained : ndarray (m, p), optional
        For ``base_kind="trained_dict"``: reuse this linear dictionary as
        the base instead of training one here.

    Returns
    -------
    (KernelBase, KernelDictionary)
    """
    Y = check_signal_matrix(Y)
    n_signals = Y.shape[1]
    cfg.validate_signal_count(n_signals)
    p = min(max(1, round_half_up(cfg.base_fraction * n_signals)), n_signals)
    if cfg.base_kind == "sampled":
        chosen = np.sort(
            seed_stream(cfg.seed, "base-sample").choice(n_signals, size=p, replace=False)
        )
        base_signals = Y[:, chosen]
    else:
        if pre_trained is not None:
            base_signals = check_dictionary(pre_trained, name="pre_trained")
            if base_signals.shape[0] != Y.shape[0]:
                raise ValueError("pre-trained base dimension does not match the signals")
        else:
            base_cfg = DlConfig(
                n_atoms=p,
                sparsity=min(cfg.sparsity, p),
                iterations=cfg.iterations,
                seed=derive_seed(cfg.seed, "base-dict"),
            )
            base_signals = train_dl(Y, base_cfg)
    base = make_kernel_base(cfg.kernel, base_signals, cfg.base_kind)
    signal_gram = gram(cfg.kernel, Y, base.signals)
    kernel_diag = kernel_diagonal(cfg.kernel, Y)
    A = _init_coefficients(base, cfg.n_atoms, seed_stream(cfg.seed, "atom-init"))
    pass_fn = rkdl_s_pass if cfg.base_kind == "sampled" else rkdl_d_pass
    for iteration in range(cfg.iterations):
        selected = select_train_indices(
            n_signals, cfg.train_perc, seed_stream(cfg.seed, "sample", iteration)
        )
        code, err2 = batch_kernel_code(
            base, A, signal_gram[selected], kernel_diag[selected], cfg.sparsity
        )
        kept = drop_worst(np.sqrt(err2), cfg.train_drop_perc)
        rows = signal_gram[selected]
        if kept.size < selected.size:
            code = code.select_columns(kept)
            rows = rows[kept]
        A, _ = pass_fn(base.gram, rows, A, code)
    return base, KernelDictionary(coefficients=A, base=base)


def kernel_score(base, A, spec, y, sparsity):
    """Feature-space representation error of one signal."""
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.shape[0] != base.signals.shape[0]:
        raise ValueError(f"signal dimension {y.shape[0]} does not match base {base.signals.shape[0]}")
    column = y.reshape(-1, 1)
    k_y = gram(spec, base.signals, column)[:, 0]
    k_yy = float(kernel_diagonal(spec, column)[0])
    _, _, err2 = kernel_omp(base, A, k_y, k_yy, sparsity)
    return math.sqrt(err2)


def kernel_scores(base, A, spec, Y, sparsity):
    """Feature-space representation errors for every column of ``Y``."""
    Y = check_signal_matrix(Y)
    if Y.shape[0] != base.signals.shape[0]:
        raise ValueError(f"signal dimension {Y.shape[0]} does not match base {base.signals.shape[0]}")
    signal_gram = gram(spec, Y, base.signals)
    kernel_diag = kernel_diagonal(spec, Y)
    _, err2 = batch_kernel_code(base, A, signal_gram, kernel_diag, sparsity)
    return np.sqrt(err2)


def kernel_objective(kernel_gram, signal_gram, kernel_diag, A, code):
    """Total squared feature-space error ``sum_l ||phi(y_l) - phi(B) A x_l||^2``.

    Expands through the Grams, so it never needs the full signal kernel
    matrix.  Useful for monitoring training and for convergence checks.
    """
    A = _coeff_matrix(A)
    Kbar = np.asarray(kernel_gram, dtype=np.float64)
    Khat = np.asarray(signal_gram, dtype=np.float64)
    kernel_diag = np.asarray(kernel_diag, dtype=np.float64).ravel()
    X = code.to_dense()
    G = A.T @ (Kbar @ A)
    U = Khat @ A
    cross = np.sum(U.T * X)
    quad = np.sum((G @ X) * X)
    return float(np.sum(kernel_diag) - 2.0 * cross + quad)
