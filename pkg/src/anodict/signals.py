"""Signal-matrix utilities and deterministic random stream derivation.

Signals are stored column-wise: a matrix of shape ``(m, N)`` holds ``N``
signals of dimension ``m`` as 64-bit floats.  All stochastic components of
the library draw from named child streams derived from a single master
seed, so a run is reproducible end to end from one integer.
"""

import hashlib
import math

import numpy as np

from .errors import EmptySelectionError, IndexOutOfRangeError, ZeroColumnError

ZERO_NORM_TOL = 1e-12

# Guard against float dust when a product like 0.7 * 100 should be an exact
# integer count; the guard is far below any honest fractional part.
_COUNT_EPS = 1e-9


def check_signal_matrix(Y, name="Y"):
    """Validate and return a 2-D float64 signal matrix with m, N >= 1."""
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim != 2:
        raise ValueError(f"{name} must be 2-D (m, N), got ndim={Y.ndim}")
    m, n_signals = Y.shape
    if m < 1 or n_signals < 1:
        raise ValueError(f"{name} must be non-empty, got shape {Y.shape}")
    if not np.isfinite(Y).all():
        raise ValueError(f"{name} contains non-finite entries")
    return Y


def check_dictionary(D, tol=1e-6, name="D"):
    """Validate a dictionary: a signal matrix whose columns are unit norm."""
    D = check_signal_matrix(D, name=name)
    norms = np.linalg.norm(D, axis=0)
    worst = np.max(np.abs(norms - 1.0))
    if worst > tol:
        raise ValueError(f"{name} columns must have unit norm (max deviation {worst:.3e})")
    return D


def column_norms(Y):
    return np.linalg.norm(np.asarray(Y, dtype=np.float64), axis=0)


def normalize_columns(Y):
    """Return a copy of ``Y`` with every column scaled to unit Euclidean norm.

    Raises
    ------
    ZeroColumnError
        If any column norm is at or below ``ZERO_NORM_TOL``.
    """
    Y = check_signal_matrix(Y)
    norms = np.linalg.norm(Y, axis=0)
    bad = np.flatnonzero(norms <= ZERO_NORM_TOL)
    if bad.size:
        raise ZeroColumnError(bad[0])
    return Y / norms


def column_subset(Y, indices):
    """Return a copy of the selected columns, in the order given.

    ``indices`` must be non-empty, distinct and within range.
    """
    Y = check_signal_matrix(Y)
    idx = np.atleast_1d(np.asarray(indices, dtype=np.int64))
    if idx.size == 0:
        raise EmptySelectionError("column selection is empty")
    if idx.ndim != 1:
        raise ValueError("indices must be one-dimensional")
    if np.unique(idx).size != idx.size:
        raise ValueError("column indices must be distinct")
    if idx.min() < 0 or idx.max() >= Y.shape[1]:
        raise IndexOutOfRangeError(
            f"column index out of range [0, {Y.shape[1]}): {idx.min()}..{idx.max()}"
        )
    return Y[:, idx]


def round_half_up(x):
    """Round to the nearest integer, halves up, with float-dust protection."""
    return int(math.floor(float(x) + 0.5 + _COUNT_EPS))


def ceil_count(x):
    """Ceiling with float-dust protection, for fractional-count formulas."""
    return int(math.ceil(float(x) - _COUNT_EPS))


def _token_entropy(token):
    if isinstance(token, (bool, float)):
        raise TypeError(f"stream path tokens must be int or str, got {type(token)!r}")
    if isinstance(token, (int, np.integer)):
        return int(token) & 0xFFFFFFFFFFFFFFFF
    if isinstance(token, str):
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "little")
    raise TypeError(f"stream path tokens must be int or str, got {type(token)!r}")


def _entropy(master_seed, path):
    return [int(master_seed) & 0xFFFFFFFFFFFFFFFF] + [_token_entropy(t) for t in path]


def seed_stream(master_seed, *path):
    """Return a Generator for the child stream named by ``path``.

    The same ``(master_seed, path)`` pair always yields a generator with the
    same state; distinct paths yield independent streams.  Path tokens may be
    ints (e.g. an iteration counter) or strings (a component name).
    """
    return np.random.default_rng(np.random.SeedSequence(_entropy(master_seed, path)))


def derive_seed(master_seed, *path):
    """Derive a 64-bit integer child seed from a master seed and a path."""
    seq = np.random.SeedSequence(_entropy(master_seed, path))
    return int(seq.generate_state(1, np.uint64)[0])


def as_generator(seed):
    """Coerce an int seed or an existing Generator into a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(int(seed))
