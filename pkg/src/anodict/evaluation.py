"""Detection metrics and the repeated-random-split benchmark harness.

``run_benchmark`` crosses datasets with detector specifications over a
number of independent train/test rounds.  All detectors see identical
splits in a given round (split seeds never depend on the detector), so
comparisons are paired; every cell is seeded from the master seed, the
dataset name, the detector name and the round index, which makes whole
reports reproducible from one integer.
"""

import time
from dataclasses import asdict, dataclass

import numpy as np
from joblib import Parallel, delayed
from scipy.stats import rankdata

from .datasets import split_train_test
from .detector import decision_scores, default_config, fit
from .dict_learning import DlConfig, train_dl
from .errors import SingleClassError
from .kernel_dl import KdlConfig
from .kernels import KernelSpec, default_kernel_spec
from .signals import derive_seed, round_half_up

REPORT_FORMAT = "anodict-bench-report"
REPORT_VERSION = 1


def _check_scores_labels(scores, labels):
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels).ravel()
    if scores.shape != labels.shape:
        raise ValueError("scores and labels must have equal length")
    if scores.size == 0:
        raise ValueError("scores are empty")
    if not np.isfinite(scores).all():
        raise ValueError("scores must be finite")
    if not np.isin(labels, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    labels = labels.astype(np.int64)
    n_pos = int(labels.sum())
    if n_pos == 0 or n_pos == labels.size:
        raise SingleClassError("need at least one inlier and one outlier")
    return scores, labels, n_pos


def roc_auc(scores, labels):
    """Area under the ROC curve, ties counted at half credit.

    Computed by the rank (Mann-Whitney) formulation, which equals the
    pairwise probability that a random outlier outscores a random inlier.
    """
    scores, labels, n_pos = _check_scores_labels(scores, labels)
    n_neg = labels.size - n_pos
    ranks = rankdata(scores, method="average")
    pos_rank_sum = float(ranks[labels == 1].sum())
    u_stat = pos_rank_sum - n_pos * (n_pos + 1) / 2.0
    return u_stat / float(n_pos * n_neg)


def precision_at_n(scores, labels):
    """Fraction of true outliers among the top-n scores, n = #outliers.

    Score ties at the cut are resolved by taking the lower index first.
    """
    scores, labels, n_pos = _check_scores_labels(scores, labels)
    order = np.lexsort((np.arange(scores.size), -scores))
    top = order[:n_pos]
    return float(labels[top].sum()) / float(n_pos)


@dataclass(frozen=True)
class DetectorSpec:
    """One benchmark column: a named method with optional overrides.

    Fields left at ``None`` fall back to the method defaults; kernel gamma
    additionally falls back to the dimension-scaled preset, which differs
    between synthetic and real datasets.
    """

    name: str
    method: str
    kernel: str | None = None
    gamma: float | None = None
    alpha: float = 1.0
    beta: int = 3
    n_atoms: int | None = None
    sparsity: int | None = None
    iterations: int | None = None
    train_perc: float | None = None
    train_drop_perc: float | None = None
    base_fraction: float | None = None
    contamination: float = 0.1

    def resolve_config(self, dataset, seed):
        """Concrete DlConfig/KdlConfig for one dataset and fit seed."""
        overrides = {}
        for key in ("n_atoms", "sparsity", "iterations", "train_perc",
                    "train_drop_perc"):
            value = getattr(self, key)
            if value is not None:
                overrides[key] = value
        if self.method in ("dl", "sdl"):
            return default_config(self.method, seed=seed, **overrides)
        if self.base_fraction is not None:
            overrides["base_fraction"] = self.base_fraction
        family = self.kernel if self.kernel is not None else "rbf"
        m = dataset.signals.shape[0]
        if self.gamma is not None:
            spec = KernelSpec(family, self.gamma, self.alpha, self.beta)
        else:
            spec = default_kernel_spec(family, m, synthetic=dataset.synthetic,
                                       alpha=self.alpha, beta=self.beta)
        return default_config(self.method, seed=seed, kernel=spec, **overrides)


@dataclass
class CellResult:
    """One (dataset, detector, round) outcome; ``error`` set on failure."""

    roc_auc: float
    precision_at_n: float
    seconds: float
    error: str | None = None


@dataclass
class BenchmarkReport:
    """All per-round results plus the provenance needed to rerun them."""

    master_seed: int
    rounds: int
    train_fraction: float
    dataset_names: list
    detector_names: list
    cells: dict
    configs: dict

    def round_results(self, dataset, detector):
        return self.cells[dataset][detector]

    def _ok_values(self, dataset, detector, field):
        return [getattr(c, field) for c in self.cells[dataset][detector] if c.error is None]

    def mean_std(self, dataset, detector, field):
        values = self._ok_values(dataset, detector, field)
        if not values:
            return float("nan"), float("nan")
        arr = np.asarray(values)
        return float(arr.mean()), float(arr.std())

    def failures(self, dataset, detector):
        return [(r, c.error) for r, c in enumerate(self.cells[dataset][detector])
                if c.error is not None]

    @property
    def n_failures(self):
        return sum(len(self.failures(ds, det))
                   for ds in self.dataset_names for det in self.detector_names)


def _resolved_config_snapshot(spec, dataset):
    cfg = spec.resolve_config(dataset, seed=0)
    data = asdict(cfg)
    del data["seed"]  # per-round fit seeds derive from the master seed
    return data


def _base_dictionary_for(cfg, Y_train, base_seed, cache):
    """Train (or fetch) the shared linear base for trained-dict kernels."""
    n_train = Y_train.shape[1]
    p = min(max(1, round_half_up(cfg.base_fraction * n_train)), n_train)
    key = (p, min(cfg.sparsity, p), cfg.iterations)
    if key not in cache:
        base_cfg = DlConfig(n_atoms=p, sparsity=min(cfg.sparsity, p),
                            iterations=cfg.iterations, seed=base_seed)
        cache[key] = train_dl(Y_train, base_cfg)
    return cache[key]


def _run_group(dataset, round_index, detector_specs, master_seed, train_fraction):
    """All detectors on one (dataset, round) split; shares the split and
    any trained-dictionary base among them."""
    split_seed = derive_seed(master_seed, dataset.name, "split", round_index)
    try:
        Y_train, test = split_train_test(dataset, train_fraction, split_seed)
    except Exception as exc:  # noqa: BLE001 - cell failures must not abort the run
        message = f"{type(exc).__name__}: {exc}"
        return [CellResult(float("nan"), float("nan"), float("nan"), message)
                for _ in detector_specs]
    base_cache = {}
    cells = []
    for spec in detector_specs:
        try:
            fit_seed = derive_seed(master_seed, dataset.name, spec.name, "fit", round_index)
            cfg = spec.resolve_config(dataset, fit_seed)
            pre_trained = None
            if isinstance(cfg, KdlConfig) and cfg.base_kind == "trained_dict":
                pre_trained = _base_dictionary_for(
                    cfg,
                    Y_train,
                    derive_seed(master_seed, dataset.name, "base-dict", round_index),
                    base_cache,
                )
            start = time.perf_counter()
            model = fit(Y_train, spec.method, cfg, spec.contamination, pre_trained=pre_trained)
            seconds = time.perf_counter() - start
            scores = decision_scores(model, test.signals)
            cells.append(CellResult(
                roc_auc(scores, test.labels),
                precision_at_n(scores, test.labels),
                seconds,
            ))
        except Exception as exc:  # noqa: BLE001
            cells.append(CellResult(float("nan"), float("nan"), float("nan"),
                                    f"{type(exc).__name__}: {exc}"))
    return cells


def run_benchmark(datasets, detector_specs, rounds, master_seed,
                  train_fraction=0.6, jobs=1):
    """Cross datasets and detectors over repeated random splits.

    Parameters
    ----------
    datasets : list of LabeledDataset
    detector_specs : list of DetectorSpec
    rounds : int
        Independent split/fit/score repetitions per cell.
    master_seed : int
        Root of every split and fit seed.
    train_fraction : float
        Train share of each split (default 0.6).
    jobs : int or None
        Parallel workers over (dataset, round) groups; None uses all
        cores.  Results do not depend on the worker count.

    Returns
    -------
    BenchmarkReport
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    names = [ds.name for ds in datasets]
    if len(set(names)) != len(names):
        raise ValueError("dataset names must be distinct")
    spec_names = [spec.name for spec in detector_specs]
    if len(set(spec_names)) != len(spec_names):
        raise ValueError("detector names must be distinct")
    if not datasets or not detector_specs:
        raise ValueError("need at least one dataset and one detector")
    groups = [(ds, r) for ds in datasets for r in range(rounds)]
    if jobs == 1:
        group_cells = [_run_group(ds, r, detector_specs, master_seed, train_fraction)
                       for ds, r in groups]
    else:
        group_cells = Parallel(n_jobs=jobs)(
            delayed(_run_group)(ds, r, detector_specs, master_seed, train_fraction)
            for ds, r in groups
        )
    cells = {ds.name: {spec.name: [None] * rounds for spec in detector_specs}
             for ds in datasets}
    for (ds, r), results in zip(groups, group_cells):
        for spec, cell in zip(detector_specs, results):
            cells[ds.name][spec.name][r] = cell
    configs = {ds.name: {spec.name: _resolved_config_snapshot(spec, ds)
                         for spec in detector_specs}
               for ds in datasets}
    return BenchmarkReport(
        master_seed=master_seed,
        rounds=rounds,
        train_fraction=train_fraction,
        dataset_names=names,
        detector_names=spec_names,
        cells=cells,
        configs=configs,
    )


def report_to_json_dict(report):
    """Deterministic JSON payload: metrics and provenance, no wall-clock."""
    results = {}
    for ds in report.dataset_names:
        results[ds] = {}
        for det in report.detector_names:
            roc_mean, roc_std = report.mean_std(ds, det, "roc_auc")
            prn_mean, prn_std = report.mean_std(ds, det, "precision_at_n")
            entry = {
                "roc_auc_mean": _json_float(roc_mean),
                "roc_auc_std": _json_float(roc_std),
                "precision_at_n_mean": _json_float(prn_mean),
                "precision_at_n_std": _json_float(prn_std),
                "rounds_ok": report.rounds - len(report.failures(ds, det)),
                "failures": [{"round": r, "error": msg}
                             for r, msg in report.failures(ds, det)],
            }
            results[ds][det] = entry
    return {
        "format": REPORT_FORMAT,
        "version": REPORT_VERSION,
        "master_seed": report.master_seed,
        "rounds": report.rounds,
        "train_fraction": report.train_fraction,
        "datasets": report.dataset_names,
        "detectors": report.detector_names,
        "configs": report.configs,
        "results": results,
    }


def _json_float(x):
    return None if np.isnan(x) else x


def report_timings_dict(report):
    """Per-fit wall-clock seconds; excluded from the canonical report
    because timings vary between otherwise identical runs."""
    timings = {}
    for ds in report.dataset_names:
        timings[ds] = {}
        for det in report.detector_names:
            mean, _ = report.mean_std(ds, det, "seconds")
            per_round = [None if c.error is not None else c.seconds
                         for c in report.cells[ds][det]]
            timings[ds][det] = {"seconds_per_fit_mean": _json_float(mean),
                                "seconds_per_fit": per_round}
    return timings


def _format_table(report, field, title, precision=5):
    width = max([len("dataset")] + [len(ds) for ds in report.dataset_names])
    col_widths = [max(len(det), precision + 2) for det in report.detector_names]
    lines = [title]
    header = "dataset".ljust(width) + "".join(
        "  " + det.rjust(w) for det, w in zip(report.detector_names, col_widths))
    lines.append(header)
    lines.append("-" * len(header))
    for ds in report.dataset_names:
        row = ds.ljust(width)
        for det, w in zip(report.detector_names, col_widths):
            mean, _ = report.mean_std(ds, det, field)
            text = "failed" if np.isnan(mean) else f"{mean:.{precision}f}"
            row += "  " + text.rjust(w)
        lines.append(row)
    return "\n".join(lines)


def format_report_tables(report):
    """Aligned text tables: mean ROC-AUC, mean precision@n, mean seconds."""
    parts = [
        _format_table(report, "roc_auc", "Mean ROC-AUC over "
                      f"{report.rounds} rounds (seed {report.master_seed})"),
        _format_table(report, "precision_at_n", "Mean precision@n over "
                      f"{report.rounds} rounds"),
        _format_table(report, "seconds", "Mean seconds per fit", precision=3),
    ]
    if report.n_failures:
        failing = [f"{ds}/{det}: round {r}: {msg}"
                   for ds in report.dataset_names
                   for det in report.detector_names
                   for r, msg in report.failures(ds, det)]
        parts.append("Failures:\n" + "\n".join(failing))
    return "\n\n".join(parts) + "\n"
