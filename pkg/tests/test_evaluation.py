"""Tests for the detection metrics and the benchmark harness."""

import json

import numpy as np
import pytest

from anodict.datasets import LabeledDataset
from anodict.errors import SingleClassError
from anodict.evaluation import (
    DetectorSpec,
    format_report_tables,
    precision_at_n,
    report_timings_dict,
    report_to_json_dict,
    roc_auc,
    run_benchmark,
)
from anodict.signals import normalize_columns, seed_stream


def roc_auc_pairwise(scores, labels):
    """Brute-force pairwise probability that an outlier outscores an inlier."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    credit = 0.0
    for sp in pos:
        for sn in neg:
            if sp > sn:
                credit += 1.0
            elif sp == sn:
                credit += 0.5
    return credit / float(pos.size * neg.size)


def precision_oracle(scores, labels):
    """Sort by descending score, lower index first on ties, count the top."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    n_pos = int(labels.sum())
    order = sorted(range(scores.size), key=lambda i: (-scores[i], i))
    return float(sum(labels[i] for i in order[:n_pos])) / float(n_pos)


def test_roc_auc_hand_examples():
    assert roc_auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75
    assert roc_auc([0.0, 1.0, 2.0, 3.0], [0, 0, 1, 1]) == 1.0
    assert roc_auc([3.0, 2.0, 1.0, 0.0], [0, 0, 1, 1]) == 0.0
    assert roc_auc([5.0, 5.0, 5.0, 5.0], [0, 1, 0, 1]) == 0.5


def test_precision_hand_examples():
    assert precision_at_n([0.9, 0.8, 0.1, 0.2], [1, 0, 0, 1]) == 0.5
    assert precision_at_n([0.1, 0.2, 0.9, 0.8], [0, 0, 1, 1]) == 1.0
    assert precision_at_n([0.9, 0.8, 0.1, 0.2], [0, 0, 1, 1]) == 0.0
    # All-tied scores keep input order, so the lower indices fill the top.
    assert precision_at_n([5.0, 5.0, 5.0, 5.0], [1, 0, 0, 1]) == 0.5


def test_metrics_match_pairwise_oracles():
    rng = seed_stream(404, "metric-oracle")
    for trial in range(300):
        n = int(rng.integers(2, 31))
        # Draw from a small value set so ties are common.
        scores = rng.integers(0, 6, size=n).astype(np.float64)
        labels = rng.integers(0, 2, size=n)
        if labels.sum() in (0, n):
            labels[int(rng.integers(0, n))] = 1 - labels[int(rng.integers(0, n))]
        if labels.sum() in (0, n):
            continue
        assert roc_auc(scores, labels) == roc_auc_pairwise(scores, labels), trial
        assert precision_at_n(scores, labels) == precision_oracle(scores, labels), trial


def test_metrics_invariant_under_increasing_transform():
    rng = seed_stream(405, "monotone")
    for trial in range(30):
        scores = rng.normal(size=20)
        labels = (rng.random(20) < 0.3).astype(int)
        if labels.sum() in (0, 20):
            continue
        for transformed in (2.0 * scores + 3.0, np.exp(scores)):
            assert roc_auc(transformed, labels) == roc_auc(scores, labels)
            assert precision_at_n(transformed, labels) == precision_at_n(scores, labels)


def test_roc_auc_complement_under_negation():
    rng = seed_stream(406, "negation")
    scores = rng.permutation(24).astype(np.float64)
    labels = np.array([1] * 6 + [0] * 18)
    total = roc_auc(scores, labels) + roc_auc(-scores, labels)
    assert abs(total - 1.0) < 1e-12


def test_metrics_reject_bad_input():
    with pytest.raises(SingleClassError):
        roc_auc([1.0, 2.0], [0, 0])
    with pytest.raises(SingleClassError):
        precision_at_n([1.0, 2.0], [1, 1])
    with pytest.raises(ValueError):
        roc_auc([1.0, 2.0], [0, 1, 1])
    with pytest.raises(ValueError):
        roc_auc([], [])
    with pytest.raises(ValueError):
        roc_auc([np.inf, 1.0], [0, 1])
    with pytest.raises(ValueError):
        precision_at_n([1.0, 2.0], [0, 2])


def toy_dataset(seed=0, name="toy"):
    """Small labeled set: sparse inliers over 10 atoms plus noise outliers."""
    rng = seed_stream(seed, "toy-data")
    base = normalize_columns(rng.standard_normal((16, 10)))
    inliers = np.empty((16, 110))
    for l in range(110):
        support = rng.choice(10, size=2, replace=False)
        inliers[:, l] = base[:, support] @ rng.standard_normal(2)
    outliers = rng.standard_normal((16, 14))
    signals = normalize_columns(np.hstack([inliers, outliers]))
    labels = np.concatenate([np.zeros(110, dtype=np.int64), np.ones(14, dtype=np.int64)])
    return LabeledDataset(signals, labels, name, synthetic=True)


FAST_DL = dict(n_atoms=8, sparsity=2, iterations=2)


def test_run_benchmark_single_cell():
    report = run_benchmark([toy_dataset()], [DetectorSpec("dl", "dl", **FAST_DL)],
                           rounds=3, master_seed=7)
    assert report.dataset_names == ["toy"]
    assert report.detector_names == ["dl"]
    cells = report.round_results("toy", "dl")
    assert len(cells) == 3
    for cell in cells:
        assert cell.error is None
        assert 0.0 <= cell.roc_auc <= 1.0
        assert 0.0 <= cell.precision_at_n <= 1.0
        assert cell.seconds > 0.0
    assert report.n_failures == 0
    cfg = report.configs["toy"]["dl"]
    assert cfg["n_atoms"] == 8
    assert "seed" not in cfg


def test_mean_std_matches_cells():
    report = run_benchmark([toy_dataset()], [DetectorSpec("dl", "dl", **FAST_DL)],
                           rounds=4, master_seed=3)
    values = [c.roc_auc for c in report.round_results("toy", "dl")]
    mean, std = report.mean_std("toy", "dl", "roc_auc")
    assert abs(mean - np.mean(values)) < 1e-12
    assert abs(std - np.std(values)) < 1e-12


def test_splits_paired_across_detectors():
    # Adding a second detector must not move the first one's results:
    # split seeds depend on the round, not on which detectors run.
    ds = toy_dataset(seed=2)
    spec_a = DetectorSpec("dl", "dl", **FAST_DL)
    spec_b = DetectorSpec("sdl", "sdl", **FAST_DL)
    alone = run_benchmark([ds], [spec_a], rounds=3, master_seed=11)
    together = run_benchmark([ds], [spec_a, spec_b], rounds=3, master_seed=11)
    for r in range(3):
        cell_alone = alone.round_results("toy", "dl")[r]
        cell_together = together.round_results("toy", "dl")[r]
        assert cell_alone.roc_auc == cell_together.roc_auc
        assert cell_alone.precision_at_n == cell_together.precision_at_n


def test_per_cell_failure_captured():
    ds = toy_dataset(seed=4)
    good = DetectorSpec("dl", "dl", **FAST_DL)
    bad = DetectorSpec("huge", "dl", n_atoms=500, sparsity=2, iterations=1)
    report = run_benchmark([ds], [good, bad], rounds=2, master_seed=5)
    assert report.n_failures == 2
    for r, message in report.failures("toy", "huge"):
        assert "TooFewSignalsError" in message
    assert report.failures("toy", "dl") == []
    mean, std = report.mean_std("toy", "huge", "roc_auc")
    assert np.isnan(mean) and np.isnan(std)
    payload = report_to_json_dict(report)
    entry = payload["results"]["toy"]["huge"]
    assert entry["roc_auc_mean"] is None
    assert entry["rounds_ok"] == 0
    assert len(entry["failures"]) == 2


def test_report_json_layout_and_determinism():
    ds = toy_dataset(seed=6)
    specs = [DetectorSpec("dl", "dl", **FAST_DL)]
    r1 = run_benchmark([ds], specs, rounds=2, master_seed=9)
    r2 = run_benchmark([ds], specs, rounds=2, master_seed=9)
    d1, d2 = report_to_json_dict(r1), report_to_json_dict(r2)
    assert json.dumps(d1, sort_keys=True) == json.dumps(d2, sort_keys=True)
    assert d1["format"] == "anodict-bench-report"
    assert d1["version"] == 1
    assert d1["master_seed"] == 9
    assert "seconds" not in json.dumps(d1)
    timings = report_timings_dict(r1)
    assert len(timings["toy"]["dl"]["seconds_per_fit"]) == 2


def test_jobs_do_not_change_results():
    ds = toy_dataset(seed=8)
    specs = [DetectorSpec("dl", "dl", **FAST_DL),
             DetectorSpec("sdl", "sdl", **FAST_DL)]
    serial = run_benchmark([ds], specs, rounds=2, master_seed=13, jobs=1)
    parallel = run_benchmark([ds], specs, rounds=2, master_seed=13, jobs=2)
    for det in ("dl", "sdl"):
        for r in range(2):
            assert (serial.round_results("toy", det)[r].roc_auc
                    == parallel.round_results("toy", det)[r].roc_auc)


def test_run_benchmark_validation():
    ds = toy_dataset()
    spec = DetectorSpec("dl", "dl", **FAST_DL)
    with pytest.raises(ValueError):
        run_benchmark([ds], [spec], rounds=0, master_seed=1)
    with pytest.raises(ValueError):
        run_benchmark([ds, toy_dataset(seed=1)], [spec], rounds=1, master_seed=1)
    with pytest.raises(ValueError):
        run_benchmark([ds], [spec, spec], rounds=1, master_seed=1)
    with pytest.raises(ValueError):
        run_benchmark([], [spec], rounds=1, master_seed=1)
    with pytest.raises(ValueError):
        run_benchmark([ds], [], rounds=1, master_seed=1)


def test_format_report_tables_smoke():
    ds = toy_dataset(seed=10)
    specs = [DetectorSpec("dl", "dl", **FAST_DL),
             DetectorSpec("huge", "dl", n_atoms=500, sparsity=2, iterations=1)]
    report = run_benchmark([ds], specs, rounds=1, master_seed=2)
    text = format_report_tables(report)
    assert "toy" in text
    assert "dl" in text
    assert "failed" in text
    assert "Failures:" in text
