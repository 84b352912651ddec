"""Synthetic generators, a labeled CSV loader and train/test splitting.

Datasets hold signals column-wise with a 0/1 label per signal (1 marks an
outlier).  Both built-in generators produce 512 inliers plus 64 outliers
of dimension 64 with unit-norm columns, mirroring a standard benchmark
recipe for representation-based detectors.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateSplitError,
    NonBinaryLabelError,
    ParseError,
    ZeroColumnError,
)
from .signals import (
    as_generator,
    check_signal_matrix,
    normalize_columns,
    round_half_up,
    seed_stream,
)

SIGNAL_DIM = 64
N_INLIERS = 512
N_OUTLIERS = 64
INLIER_ATOMS = 50
OUTLIER_ATOMS = 400
GEN_SPARSITY = 4

GAUSS_INLIER_MEAN = 0.0
GAUSS_INLIER_STD = 0.5
GAUSS_OUTLIER_MEAN = -0.1
GAUSS_OUTLIER_STD = 0.45


@dataclass
class LabeledDataset:
    """Signals (m, N) with one 0/1 label per column; 1 marks an outlier."""

    signals: np.ndarray
    labels: np.ndarray
    name: str
    synthetic: bool = False

    def __post_init__(self):
        self.signals = check_signal_matrix(self.signals, name="signals")
        self.labels = np.asarray(self.labels, dtype=np.int64).ravel()
        if self.labels.shape[0] != self.signals.shape[1]:
            raise ValueError("one label per signal required")
        if not np.isin(self.labels, (0, 1)).all():
            raise NonBinaryLabelError("labels must be 0 or 1")

    @property
    def n_signals(self):
        return self.signals.shape[1]

    @property
    def n_outliers(self):
        return int(self.labels.sum())


def _sparse_signals(dictionary, count, sparsity, rng):
    m, n_atoms = dictionary.shape
    signals = np.empty((m, count))
    for l in range(count):
        support = rng.choice(n_atoms, size=sparsity, replace=False)
        coeffs = rng.standard_normal(sparsity)
        signals[:, l] = dictionary[:, support] @ coeffs
    return signals


def gen_sparse_synthetic(seed=0):
    """Inliers sparse over a small dictionary, outliers over a large one.

    Inliers combine 4 of 50 atoms, outliers 4 of 400 atoms from an
    unrelated dictionary; both dictionaries are random with unit-norm
    columns and all signals are normalized after generation.
    """
    rng = seed_stream(seed, "sparse-synthetic")
    dict_in = normalize_columns(rng.standard_normal((SIGNAL_DIM, INLIER_ATOMS)))
    dict_out = normalize_columns(rng.standard_normal((SIGNAL_DIM, OUTLIER_ATOMS)))
    inliers = _sparse_signals(dict_in, N_INLIERS, GEN_SPARSITY, rng)
    outliers = _sparse_signals(dict_out, N_OUTLIERS, GEN_SPARSITY, rng)
    signals = normalize_columns(np.hstack([inliers, outliers]))
    labels = np.concatenate([np.zeros(N_INLIERS, dtype=np.int64),
                             np.ones(N_OUTLIERS, dtype=np.int64)])
    return LabeledDataset(signals, labels, "synthetic_sparse", synthetic=True)


def gen_gauss_synthetic(seed=0):
    """Two Gaussian clouds with slightly shifted mean and scale."""
    rng = seed_stream(seed, "gauss-synthetic")
    inliers = rng.normal(GAUSS_INLIER_MEAN, GAUSS_INLIER_STD, size=(SIGNAL_DIM, N_INLIERS))
    outliers = rng.normal(GAUSS_OUTLIER_MEAN, GAUSS_OUTLIER_STD, size=(SIGNAL_DIM, N_OUTLIERS))
    signals = normalize_columns(np.hstack([inliers, outliers]))
    labels = np.concatenate([np.zeros(N_INLIERS, dtype=np.int64),
                             np.ones(N_OUTLIERS, dtype=np.int64)])
    return LabeledDataset(signals, labels, "synthetic_gauss", synthetic=True)


def _looks_numeric(tokens):
    for token in tokens:
        try:
            float(token)
        except ValueError:
            return False
    return True


def load_labeled_matrix(path, label_position="last", delimiter=",",
                        standardize_features=False, name=None, synthetic=False):
    """Load a labeled dataset from a delimited text file.

    Each row is one signal followed (or preceded, with
    ``label_position="first"``) by its 0/1 label; ``label_position="none"``
    reads an unlabeled file and assigns label 0 everywhere.  A non-numeric
    first row is treated as a header and skipped.
    ``standardize_features=True`` rescales every feature to zero mean and
    unit variance before use, as an alternative to relying on the later
    per-signal normalization alone.
    """
    if label_position not in ("first", "last", "none"):
        raise ValueError("label_position must be 'first', 'last' or 'none'")
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh]
    rows = []
    width = None
    header_skipped = False
    for i, line in enumerate(lines):
        if not line.strip():
            continue
        tokens = [t.strip() for t in line.split(delimiter)]
        if i == 0 and not _looks_numeric(tokens):
            header_skipped = True
            continue
        if width is None:
            width = len(tokens)
            min_width = 1 if label_position == "none" else 2
            if width < min_width:
                raise ParseError(i + 1, 1, "need at least one feature and a label")
        elif len(tokens) != width:
            raise ParseError(i + 1, len(tokens), f"expected {width} fields, got {len(tokens)}")
        values = np.empty(width)
        for j, token in enumerate(tokens):
            try:
                values[j] = float(token)
            except ValueError:
                raise ParseError(i + 1, j + 1, f"not a number: {token!r}") from None
        rows.append(values)
    if not rows:
        raise ParseError(1, 1, "file holds no data rows" + (" besides the header" if header_skipped else ""))
    table = np.vstack(rows)
    if label_position == "none":
        features, labels = table, np.zeros(table.shape[0])
    elif label_position == "last":
        features, labels = table[:, :-1], table[:, -1]
    else:
        features, labels = table[:, 1:], table[:, 0]
    if not np.isin(labels, (0.0, 1.0)).all():
        bad = labels[~np.isin(labels, (0.0, 1.0))][0]
        raise NonBinaryLabelError(f"labels must be 0 or 1, found {bad!r}")
    signals = features.T
    if standardize_features:
        mean = signals.mean(axis=1, keepdims=True)
        std = signals.std(axis=1, keepdims=True)
        std[std == 0.0] = 1.0
        signals = (signals - mean) / std
    if name is None:
        name = str(path).rsplit("/", 1)[-1].rsplit(".", 1)[0]
    return LabeledDataset(signals, labels.astype(np.int64), name, synthetic=synthetic)


def split_train_test(dataset, train_fraction, seed, max_attempts=100):
    """Random train/test split with normalized columns on both sides.

    The train side keeps only signals (labels are not used while
    fitting); the test side keeps its labels and must contain at least
    one inlier and one outlier, resampling the split up to
    ``max_attempts`` times before raising DegenerateSplitError.

    Returns
    -------
    (ndarray, LabeledDataset)
        Normalized training signals and the labeled, normalized test set.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    n_signals = dataset.n_signals
    n_train = round_half_up(train_fraction * n_signals)
    if n_train < 1 or n_train >= n_signals:
        raise DegenerateSplitError(
            f"train_fraction {train_fraction} leaves no signals on one side of {n_signals}"
        )
    rng = as_generator(seed)
    for _ in range(max_attempts):
        perm = rng.permutation(n_signals)
        train_idx = np.sort(perm[:n_train])
        test_idx = np.sort(perm[n_train:])
        test_labels = dataset.labels[test_idx]
        if test_labels.min() == 0 and test_labels.max() == 1:
            break
    else:
        raise DegenerateSplitError(
            f"no split with both classes on the test side in {max_attempts} attempts"
        )
    try:
        train = normalize_columns(dataset.signals[:, train_idx])
        test_signals = normalize_columns(dataset.signals[:, test_idx])
    except ZeroColumnError as exc:
        raise ZeroColumnError(exc.index, "dataset contains a zero signal") from exc
    test = LabeledDataset(test_signals, test_labels, dataset.name, synthetic=dataset.synthetic)
    return train, test
