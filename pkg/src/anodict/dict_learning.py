"""Linear dictionary learning with approximate K-SVD updates.

The trainer alternates greedy sparse coding with per-atom dictionary
updates.  Two knobs make the loop selective: each iteration codes only a
random fraction of the training signals (``train_perc``) and then drops
the worst-represented fraction of those (``train_drop_perc``) before the
dictionary update, which keeps rare, badly-modelled signals (the would-be
anomalies) from pulling atoms toward themselves.  With ``train_perc=1``
and ``train_drop_perc=0`` the loop is plain dictionary learning.
"""

from dataclasses import dataclass

import numpy as np

from .errors import TooFewSignalsError, ZeroColumnError
from .signals import (
    ZERO_NORM_TOL,
    as_generator,
    ceil_count,
    check_signal_matrix,
    normalize_columns,
    round_half_up,
    seed_stream,
)
from .sparse_coding import SparseCode, batch_code, representation_errors


@dataclass(frozen=True)
class DlConfig:
    """Hyperparameters for ``train_dl``.

    ``n_atoms`` is the dictionary size, ``sparsity`` the per-signal atom
    budget, ``train_perc`` the fraction of signals sampled per iteration
    and ``train_drop_perc`` the fraction of the sampled signals dropped
    for having the largest residuals.
    """

    n_atoms: int = 50
    sparsity: int = 5
    iterations: int = 20
    train_perc: float = 1.0
    train_drop_perc: float = 0.0
    seed: int = 0

    def __post_init__(self):
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

    def validate_signal_count(self, n_signals):
        """Check that selection and dropout leave at least n_atoms signals."""
        remaining = ceil_count(n_signals * self.train_perc * (1.0 - self.train_drop_perc))
        if remaining < self.n_atoms:
            raise TooFewSignalsError(
                f"{n_signals} signals leave {remaining} after selection/dropout, "
                f"need at least {self.n_atoms}"
            )


def init_dictionary(Y, n_atoms, rng):
    """Initialize a dictionary from ``n_atoms`` distinct random signals.

    Columns are drawn without replacement and normalized.  If a drawn
    column has (near-)zero norm the draw is repeated, up to N attempts.
    """
    Y = check_signal_matrix(Y)
    n_signals = Y.shape[1]
    if n_signals < n_atoms:
        raise TooFewSignalsError(f"need {n_atoms} signals to seed the dictionary, have {n_signals}")
    rng = as_generator(rng)
    norms = np.linalg.norm(Y, axis=0)
    for _ in range(n_signals):
        chosen = rng.choice(n_signals, size=n_atoms, replace=False)
        if np.all(norms[chosen] > ZERO_NORM_TOL):
            return normalize_columns(Y[:, chosen])
    raise ZeroColumnError(int(chosen[np.argmin(norms[chosen])]),
                          "could not draw nonzero initial atoms")


def select_train_indices(n_signals, train_perc, rng):
    """Sample round(train_perc * N) distinct signal indices, ascending."""
    if not 0.0 < train_perc <= 1.0:
        raise ValueError("train_perc must be in (0, 1]")
    count = round_half_up(train_perc * n_signals)
    count = max(1, min(count, n_signals))
    rng = as_generator(rng)
    return np.sort(rng.choice(n_signals, size=count, replace=False))


def drop_worst(errors, train_drop_perc):
    """Indices that survive dropping the largest-error fraction.

    Drops ``ceil(train_drop_perc * len(errors))`` entries with the largest
    values; on ties at the cut the lower index is retained.  Returns the
    retained indices in ascending order.
    """
    errors = np.asarray(errors, dtype=np.float64).ravel()
    if not 0.0 <= train_drop_perc < 1.0:
        raise ValueError("train_drop_perc must be in [0, 1)")
    count = errors.size
    n_drop = ceil_count(train_drop_perc * count)
    if n_drop == 0:
        return np.arange(count, dtype=np.int64)
    # Ascending (error, index) order: the retained prefix keeps the lower
    # index whenever ties straddle the cut.
    order = np.lexsort((np.arange(count), errors))
    return np.sort(order[: count - n_drop])


def _worst_represented(Y, D, X_dense):
    residual_norms = np.linalg.norm(Y - D @ X_dense, axis=0)
    return int(np.argmax(residual_norms))


def aksvd_pass(D, Y, code, atom_indices=None):
    """One approximate K-SVD sweep over the dictionary atoms.

    For each atom ``j`` with user columns ``I_j``, the residual without
    that atom's contribution is ``F = Y[:, I_j] - D X[:, I_j] + d_j x_j``;
    the atom becomes ``F x_j / ||F x_j||`` and its coefficient row then
    ``d_j^T F``.  Atoms used by no column are replaced by the currently
    worst-represented signal, normalized; atoms whose coefficient row is
    all zero are skipped.  Supports never change.

    Parameters
    ----------
    D : ndarray (m, n)
        Current dictionary; not modified.
    Y : ndarray (m, N)
        Signals the code refers to.
    code : SparseCode
        Current coefficients for ``Y``.
    atom_indices : sequence of int, optional
        Restrict the sweep to these atoms (default: all, in index order).

    Returns
    -------
    (ndarray, SparseCode)
        Updated dictionary and coefficients.
    """
    D = np.array(D, dtype=np.float64)
    Y = check_signal_matrix(Y)
    if code.n_signals != Y.shape[1]:
        raise ValueError("code does not match the signal count")
    if code.n_atoms != D.shape[1]:
        raise ValueError("code does not match the dictionary size")
    X = code.to_dense()
    users = code.atom_users()
    order = range(D.shape[1]) if atom_indices is None else atom_indices
    for j in order:
        cols = users[j]
        if cols.size == 0:
            worst = _worst_represented(Y, D, X)
            replacement = Y[:, worst]
            norm = np.linalg.norm(replacement)
            if norm > ZERO_NORM_TOL:
                D[:, j] = replacement / norm
            continue
        x_row = X[j, cols]
        if not np.any(x_row):
            continue
        F = Y[:, cols] - D @ X[:, cols] + np.outer(D[:, j], x_row)
        direction = F @ x_row
        norm = np.linalg.norm(direction)
        if norm > ZERO_NORM_TOL:
            D[:, j] = direction / norm
        X[j, cols] = D[:, j] @ F
    out = code.select_columns(np.arange(code.n_signals))
    out.replace_coeffs_from_dense(X)
    return D, out


def train_dl(Y, cfg):
    """Train a dictionary on normalized signals.

    Each iteration draws a fresh random subset of the columns, codes it,
    drops the worst-represented fraction and runs one ``aksvd_pass`` on
    the rest.

    Parameters
    ----------
    Y : ndarray (m, N)
        Training signals with unit-norm columns.
    cfg : DlConfig

    Returns
    -------
    ndarray (m, n_atoms)
        The trained dictionary (unit-norm columns).
    """
    Y = check_signal_matrix(Y)
    n_signals = Y.shape[1]
    if n_signals < cfg.n_atoms:
        raise TooFewSignalsError(f"need at least {cfg.n_atoms} signals, have {n_signals}")
    cfg.validate_signal_count(n_signals)
    D = init_dictionary(Y, cfg.n_atoms, seed_stream(cfg.seed, "dict-init"))
    for iteration in range(cfg.iterations):
        selected = select_train_indices(
            n_signals, cfg.train_perc, seed_stream(cfg.seed, "sample", iteration)
        )
        Y_sel = Y[:, selected]
        code = batch_code(D, Y_sel, cfg.sparsity)
        errors = representation_errors(D, Y_sel, code)
        kept = drop_worst(errors, cfg.train_drop_perc)
        if kept.size < selected.size:
            Y_sel = Y_sel[:, kept]
            code = code.select_columns(kept)
        D, _ = aksvd_pass(D, Y_sel, code)
    return D
