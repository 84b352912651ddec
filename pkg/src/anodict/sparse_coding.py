"""Greedy sparse coding with Orthogonal Matching Pursuit (OMP).

Given a dictionary ``D`` with unit-norm columns, OMP approximates each
signal ``y`` by at most ``s`` atoms: it repeatedly picks the atom most
correlated with the current residual and re-solves the least-squares
problem on the enlarged support, so the residual stays orthogonal to
every selected atom.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import SingularSubproblemError
from .signals import check_signal_matrix

GRAM_JITTER = 1e-12


@dataclass
class SparseCode:
    """Column-sparse coefficients for a batch of signals.

    ``supports[l]`` holds the atom indices used by signal ``l`` and
    ``coeffs[l]`` the matching coefficients; logically this is an
    ``n_atoms x n_signals`` matrix with at most ``sparsity`` nonzeros per
    column.
    """

    supports: list
    coeffs: list
    n_atoms: int
    sparsity: int

    def __post_init__(self):
        if len(self.supports) != len(self.coeffs):
            raise ValueError("supports and coeffs must have equal length")
        for l, (supp, coef) in enumerate(zip(self.supports, self.coeffs)):
            supp = np.asarray(supp, dtype=np.int64)
            coef = np.asarray(coef, dtype=np.float64)
            if supp.shape != coef.shape or supp.ndim != 1:
                raise ValueError(f"column {l}: support/coefficient shape mismatch")
            if supp.size > self.sparsity:
                raise ValueError(f"column {l}: support exceeds sparsity bound")
            if supp.size and (supp.min() < 0 or supp.max() >= self.n_atoms):
                raise ValueError(f"column {l}: atom index out of range")
            if np.unique(supp).size != supp.size:
                raise ValueError(f"column {l}: repeated atom in support")
            if not np.isfinite(coef).all():
                raise ValueError(f"column {l}: non-finite coefficient")
            self.supports[l] = supp
            self.coeffs[l] = coef

    @property
    def n_signals(self):
        return len(self.supports)

    def to_dense(self):
        """Densify to an (n_atoms, n_signals) array."""
        X = np.zeros((self.n_atoms, self.n_signals))
        for l, (supp, coef) in enumerate(zip(self.supports, self.coeffs)):
            X[supp, l] = coef
        return X

    def atom_users(self):
        """For each atom, the array of signal columns whose support holds it."""
        users = [[] for _ in range(self.n_atoms)]
        for l, supp in enumerate(self.supports):
            for j in supp:
                users[j].append(l)
        return [np.asarray(u, dtype=np.int64) for u in users]

    def select_columns(self, indices):
        """A new SparseCode restricted to the given signal columns."""
        idx = np.asarray(indices, dtype=np.int64)
        return SparseCode(
            [self.supports[i].copy() for i in idx],
            [self.coeffs[i].copy() for i in idx],
            self.n_atoms,
            self.sparsity,
        )

    def replace_coeffs_from_dense(self, X):
        """Refresh coefficient values from a dense matrix, supports unchanged."""
        for l, supp in enumerate(self.supports):
            self.coeffs[l] = np.asarray(X[supp, l], dtype=np.float64)


def _solve_spd(G, rhs, context="least-squares subproblem"):
    """Solve G x = rhs for symmetric positive definite G, jittering once."""
    try:
        return cho_solve(cho_factor(G, lower=True), rhs)
    except np.linalg.LinAlgError:
        jitter = GRAM_JITTER * np.trace(G)
        try:
            return cho_solve(cho_factor(G + jitter * np.eye(G.shape[0]), lower=True), rhs)
        except np.linalg.LinAlgError as exc:
            raise SingularSubproblemError(f"{context}: Gram matrix singular after jitter") from exc


def omp(D, y, sparsity, residual_tol=0.0):
    """Code one signal against a dictionary.

    Parameters
    ----------
    D : ndarray of shape (m, n)
        Dictionary with unit-norm columns.
    y : ndarray of shape (m,)
        Signal to approximate.
    sparsity : int
        Maximum number of atoms to select (1 <= sparsity <= n).
    residual_tol : float
        Stop early once the residual norm drops to this value or below.

    Returns
    -------
    support : int ndarray
        Selected atom indices, in selection order.
    coeffs : float ndarray
        Least-squares coefficients on the support.
    residual_norm : float
        Euclidean norm of ``y - D[:, support] @ coeffs``.
    """
    D = np.asarray(D, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    m, n = D.shape
    if y.shape[0] != m:
        raise ValueError(f"signal dimension {y.shape[0]} does not match dictionary {m}")
    if not 1 <= sparsity <= n:
        raise ValueError(f"sparsity must be in [1, {n}], got {sparsity}")

    support = []
    coeffs = np.zeros(0)
    residual = y.copy()
    residual_norm = float(np.linalg.norm(residual))
    for _ in range(sparsity):
        if residual_norm <= residual_tol:
            break
        corr = np.abs(D.T @ residual)
        if support:
            corr[support] = -1.0
        j = int(np.argmax(corr))
        if corr[j] <= 0.0:
            break
        support.append(j)
        Ds = D[:, support]
        gram = Ds.T @ Ds
        coeffs = _solve_spd(gram, Ds.T @ y, context=f"omp support {support}")
        residual = y - Ds @ coeffs
        residual_norm = float(np.linalg.norm(residual))
    return np.asarray(support, dtype=np.int64), np.asarray(coeffs, dtype=np.float64), residual_norm


def batch_code(D, Y, sparsity, residual_tol=0.0):
    """Run ``omp`` over every column of ``Y`` and collect a SparseCode."""
    D = np.asarray(D, dtype=np.float64)
    Y = check_signal_matrix(Y)
    supports, coeffs = [], []
    for l in range(Y.shape[1]):
        try:
            supp, coef, _ = omp(D, Y[:, l], sparsity, residual_tol)
        except SingularSubproblemError as exc:
            raise SingularSubproblemError(f"column {l}: {exc}") from exc
        supports.append(supp)
        coeffs.append(coef)
    return SparseCode(supports, coeffs, D.shape[1], sparsity)


def representation_errors(D, Y, code=None, sparsity=None, residual_tol=0.0):
    """Per-column residual norms ``||y_l - D x_l||``.

    Codes ``Y`` first when ``code`` is not supplied (then ``sparsity`` is
    required).
    """
    D = np.asarray(D, dtype=np.float64)
    Y = check_signal_matrix(Y)
    if code is None:
        if sparsity is None:
            raise ValueError("need either a SparseCode or a sparsity level")
        code = batch_code(D, Y, sparsity, residual_tol)
    residual = Y - D @ code.to_dense()
    return np.linalg.norm(residual, axis=0)
