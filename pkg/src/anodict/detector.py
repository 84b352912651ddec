"""Anomaly detectors scoring signals by representation error.

A detector trains a dictionary (linear or kernel) on unlabeled signals
and scores any signal by how badly the dictionary represents it under the
sparsity budget; signals above a contamination-derived threshold are
flagged as outliers.  Methods:

==========  ==================================================
dl          plain linear dictionary learning
sdl         selective linear (subset sampling + dropout)
rkdl_s      reduced kernel, base sampled from the signals
rkdl_d      reduced kernel, base from a trained linear dictionary
srkdl_s     selective variant of rkdl_s
srkdl_d     selective variant of rkdl_d
==========  ==================================================
"""

import json
from dataclasses import asdict, dataclass

import numpy as np

from .dict_learning import DlConfig, train_dl
from .errors import DimensionMismatchError
from .kernel_dl import KdlConfig, KernelDictionary, kernel_scores, train_rkdl
from .kernels import KernelBase, KernelSpec, default_kernel_spec, make_kernel_base
from .signals import check_signal_matrix
from .sparse_coding import representation_errors

LINEAR_METHODS = ("dl", "sdl")
KERNEL_METHODS = ("rkdl_s", "rkdl_d", "srkdl_s", "srkdl_d")
METHODS = LINEAR_METHODS + KERNEL_METHODS

SELECTIVE_LINEAR = {"train_perc": 0.7, "train_drop_perc": 0.4}
SELECTIVE_KERNEL = {"train_perc": 0.8, "train_drop_perc": 0.3}

MODEL_FORMAT = "anodict-detector"
MODEL_VERSION = 1


@dataclass
class DetectorModel:
    """A fitted detector: the learned model plus its decision threshold."""

    method: str
    config: object
    contamination: float
    threshold: float
    train_scores: np.ndarray
    dictionary: np.ndarray | None = None
    kernel_base: KernelBase | None = None
    kernel_dictionary: KernelDictionary | None = None

    @property
    def signal_dim(self):
        if self.dictionary is not None:
            return self.dictionary.shape[0]
        return self.kernel_base.signals.shape[0]


def default_config(method, *, m=None, seed=0, kernel="rbf", synthetic=True, **overrides):
    """Build the default configuration for a method.

    Kernel methods need the signal dimension ``m`` to scale gamma unless a
    full KernelSpec (or explicit gamma) is passed in ``overrides``.
    ``synthetic`` switches between the gamma presets for synthetic and
    real data.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    if method in LINEAR_METHODS:
        params = dict(SELECTIVE_LINEAR) if method == "sdl" else {}
        params.update(overrides)
        return DlConfig(seed=seed, **params)
    params = dict(SELECTIVE_KERNEL) if method.startswith("s") else {}
    params["base_kind"] = "sampled" if method.endswith("_s") else "trained_dict"
    params.update(overrides)
    if "kernel" not in params:
        if isinstance(kernel, KernelSpec):
            params["kernel"] = kernel
        else:
            if m is None:
                raise ValueError("kernel methods need the signal dimension m to derive gamma")
            params["kernel"] = default_kernel_spec(kernel, m, synthetic=synthetic)
    return KdlConfig(seed=seed, **params)


def _quantile_threshold(train_scores, contamination):
    return float(np.quantile(train_scores, 1.0 - contamination, method="higher"))


def fit(Y_train, method, cfg=None, contamination=0.1, pre_trained=None):
    """Fit a detector on unlabeled training signals.

    Parameters
    ----------
    Y_train : ndarray (m, N)
        Training signals with unit-norm columns.
    method : str
        One of ``METHODS``.
    cfg : DlConfig or KdlConfig, optional
        Defaults to ``default_config(method, m=...)``.
    contamination : float in (0, 0.5]
        Expected outlier fraction; sets the threshold at the matching
        upper quantile of the training scores.
    pre_trained : ndarray, optional
        For ``rkdl_d``/``srkdl_d``: reuse this linear dictionary as base.

    Returns
    -------
    DetectorModel
    """
    Y_train = check_signal_matrix(Y_train, name="Y_train")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    if not 0.0 < contamination <= 0.5:
        raise ValueError("contamination must be in (0, 0.5]")
    norms = np.linalg.norm(Y_train, axis=0)
    if np.max(np.abs(norms - 1.0)) > 1e-6:
        raise ValueError("training signals must have unit-norm columns (see normalize_columns)")
    if cfg is None:
        cfg = default_config(method, m=Y_train.shape[0])
    if method in LINEAR_METHODS:
        if not isinstance(cfg, DlConfig):
            raise ValueError(f"method {method} needs a DlConfig")
        dictionary = train_dl(Y_train, cfg)
        scores = representation_errors(dictionary, Y_train, sparsity=cfg.sparsity)
        model = DetectorModel(
            method=method,
            config=cfg,
            contamination=contamination,
            threshold=0.0,
            train_scores=scores,
            dictionary=dictionary,
        )
    else:
        if not isinstance(cfg, KdlConfig):
            raise ValueError(f"method {method} needs a KdlConfig")
        expected_kind = "sampled" if method.endswith("_s") else "trained_dict"
        if cfg.base_kind != expected_kind:
            raise ValueError(f"method {method} needs base_kind {expected_kind!r}")
        base, kdict = train_rkdl(Y_train, cfg, pre_trained=pre_trained)
        scores = kernel_scores(base, kdict, cfg.kernel, Y_train, cfg.sparsity)
        model = DetectorModel(
            method=method,
            config=cfg,
            contamination=contamination,
            threshold=0.0,
            train_scores=scores,
            kernel_base=base,
            kernel_dictionary=kdict,
        )
    model.threshold = _quantile_threshold(model.train_scores, contamination)
    return model


def decision_scores(model, Y):
    """Representation-error score for every column of ``Y``.

    Higher means more anomalous.  Deterministic given the model.
    """
    Y = check_signal_matrix(Y)
    if Y.shape[0] != model.signal_dim:
        raise DimensionMismatchError(
            f"signals have dimension {Y.shape[0]}, model expects {model.signal_dim}"
        )
    if model.method in LINEAR_METHODS:
        return representation_errors(model.dictionary, Y, sparsity=model.config.sparsity)
    return kernel_scores(
        model.kernel_base,
        model.kernel_dictionary,
        model.config.kernel,
        Y,
        model.config.sparsity,
    )


def predict(model, Y):
    """0/1 outlier labels: 1 where the score strictly exceeds the threshold."""
    return (decision_scores(model, Y) > model.threshold).astype(np.int64)


def _config_to_dict(cfg):
    data = asdict(cfg)
    if isinstance(cfg, KdlConfig):
        data["kernel"] = asdict(cfg.kernel)
    return data


def _config_from_dict(method, data):
    if method in LINEAR_METHODS:
        return DlConfig(**data)
    data = dict(data)
    data["kernel"] = KernelSpec(**data["kernel"])
    return KdlConfig(**data)


def save_model(model, path):
    """Write a fitted detector to a JSON file.

    Matrices are stored row-major as 64-bit float values that round-trip
    exactly; the header carries a format name and version for forward
    compatibility.
    """
    payload = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "method": model.method,
        "contamination": model.contamination,
        "threshold": model.threshold,
        "config": _config_to_dict(model.config),
        "train_scores": model.train_scores.tolist(),
    }
    if model.method in LINEAR_METHODS:
        payload["dictionary"] = model.dictionary.tolist()
    else:
        payload["base_kind"] = model.kernel_base.kind
        payload["base_signals"] = model.kernel_base.signals.tolist()
        payload["coefficients"] = model.kernel_dictionary.coefficients.tolist()
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def load_model(path):
    """Load a detector saved by ``save_model``."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != MODEL_FORMAT:
        raise ValueError(f"not a detector model file: {path}")
    if payload.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model version {payload.get('version')!r}")
    method = payload["method"]
    cfg = _config_from_dict(method, payload["config"])
    model = DetectorModel(
        method=method,
        config=cfg,
        contamination=float(payload["contamination"]),
        threshold=float(payload["threshold"]),
        train_scores=np.asarray(payload["train_scores"], dtype=np.float64),
    )
    if method in LINEAR_METHODS:
        model.dictionary = np.asarray(payload["dictionary"], dtype=np.float64)
    else:
        base_signals = np.asarray(payload["base_signals"], dtype=np.float64)
        base = make_kernel_base(cfg.kernel, base_signals, payload["base_kind"])
        model.kernel_base = base
        model.kernel_dictionary = KernelDictionary(
            coefficients=np.asarray(payload["coefficients"], dtype=np.float64),
            base=base,
        )
    return model
