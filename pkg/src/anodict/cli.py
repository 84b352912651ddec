"""Command-line interface.

Subcommands
-----------
synth   generate a built-in synthetic dataset as labeled CSV
train   fit a detector on a labeled CSV and save the model
score   score a dataset with a saved model
bench   run the repeated-split benchmark described by a JSON config

Exit codes: 0 success, 1 runtime failure (including any failed benchmark
cell), 2 usage or configuration errors.
"""

import argparse
import json
import os
import sys

import numpy as np

from .datasets import gen_gauss_synthetic, gen_sparse_synthetic, load_labeled_matrix
from .detector import METHODS, decision_scores, default_config, fit, load_model, save_model
from .errors import AnodictError, ConfigError
from .evaluation import (
    DetectorSpec,
    format_report_tables,
    report_timings_dict,
    report_to_json_dict,
    run_benchmark,
)
from .kernels import KernelSpec, default_kernel_spec
from .signals import derive_seed, normalize_columns

_KERNEL_NAMES = {"rbf": "rbf", "poly": "polynomial", "polynomial": "polynomial"}


def _write_csv(path, dataset):
    table = np.hstack([dataset.signals.T, dataset.labels[:, None].astype(np.float64)])
    np.savetxt(path, table, fmt="%.17g", delimiter=",")


def cmd_synth(args):
    generators = {"sparse": gen_sparse_synthetic, "gauss": gen_gauss_synthetic}
    dataset = generators[args.kind](seed=args.seed)
    _write_csv(args.out, dataset)
    print(f"wrote {dataset.n_signals} signals ({dataset.n_outliers} outliers) to {args.out}")
    return 0


def _load_for_cli(path, label_position):
    return load_labeled_matrix(path, label_position=label_position)


def _config_from_args(args, m):
    overrides = {}
    for arg_name, cfg_name in (("n_atoms", "n_atoms"), ("sparsity", "sparsity"),
                               ("iters", "iterations"), ("train_perc", "train_perc"),
                               ("drop_perc", "train_drop_perc"),
                               ("base_fraction", "base_fraction")):
        value = getattr(args, arg_name)
        if value is not None:
            overrides[cfg_name] = value
    if args.method in ("dl", "sdl"):
        overrides.pop("base_fraction", None)
        return default_config(args.method, seed=args.seed, **overrides)
    family = _KERNEL_NAMES[args.kernel]
    if args.gamma is not None:
        spec = KernelSpec(family, args.gamma, args.alpha, args.beta)
    else:
        spec = default_kernel_spec(family, m, synthetic=args.synthetic_data,
                                   alpha=args.alpha, beta=args.beta)
    return default_config(args.method, seed=args.seed, kernel=spec, **overrides)


def cmd_train(args):
    dataset = load_labeled_matrix(args.dataset, label_position=args.label_position)
    signals = normalize_columns(dataset.signals)
    cfg = _config_from_args(args, signals.shape[0])
    model = fit(signals, args.method, cfg, contamination=args.contamination)
    save_model(model, args.out)
    print(f"fitted {args.method} on {signals.shape[1]} signals; "
          f"threshold {model.threshold:.6g}; model saved to {args.out}")
    return 0


def cmd_score(args):
    model = load_model(args.model)
    dataset = _load_for_cli(args.dataset, args.label_position)
    signals = normalize_columns(dataset.signals)
    scores = decision_scores(model, signals)
    flags = (scores > model.threshold).astype(np.int64)
    with open(args.out, "w", encoding="utf-8") as fh:
        for score, flag in zip(scores, flags):
            if args.labels:
                fh.write(f"{score:.17g},{flag}\n")
            else:
                fh.write(f"{score:.17g}\n")
    print(f"scored {scores.size} signals; {int(flags.sum())} flagged; wrote {args.out}")
    return 0


def _cfg_get(obj, field, path, expected, default=None, required=False):
    if field not in obj:
        if required:
            raise ConfigError(f"{path}.{field}", "missing required field")
        return default
    value = obj[field]
    if expected is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if expected is not None and not isinstance(value, expected):
        kind = expected.__name__ if isinstance(expected, type) else str(expected)
        raise ConfigError(f"{path}.{field}", f"expected {kind}, got {type(value).__name__}")
    if expected in (int, float) and isinstance(value, bool):
        raise ConfigError(f"{path}.{field}", "expected a number, got a bool")
    return value


_DATASET_KINDS = ("sparse", "gauss", "file")


def _dataset_from_entry(entry, index, master_seed):
    path = f"datasets[{index}]"
    if not isinstance(entry, dict):
        raise ConfigError(path, "expected an object")
    kind = _cfg_get(entry, "kind", path, str, required=True)
    if kind not in _DATASET_KINDS:
        raise ConfigError(f"{path}.kind", f"expected one of {_DATASET_KINDS}, got {kind!r}")
    name = _cfg_get(entry, "name", path, str)
    if kind == "file":
        file_path = _cfg_get(entry, "path", path, str, required=True)
        label_position = _cfg_get(entry, "label_position", path, str, default="last")
        if label_position not in ("first", "last"):
            raise ConfigError(f"{path}.label_position", "expected 'first' or 'last'")
        standardize = _cfg_get(entry, "standardize_features", path, bool, default=False)
        synthetic = _cfg_get(entry, "synthetic", path, bool, default=False)
        return load_labeled_matrix(file_path, label_position=label_position,
                                   standardize_features=standardize,
                                   name=name, synthetic=synthetic)
    gen_seed = _cfg_get(entry, "seed", path, int)
    if gen_seed is None:
        gen_seed = derive_seed(master_seed, name or kind, "gen")
    dataset = (gen_sparse_synthetic if kind == "sparse" else gen_gauss_synthetic)(seed=gen_seed)
    if name is not None:
        dataset.name = name
    return dataset


def _spec_from_entry(entry, index):
    path = f"detectors[{index}]"
    if not isinstance(entry, dict):
        raise ConfigError(path, "expected an object")
    method = _cfg_get(entry, "method", path, str, required=True)
    if method not in METHODS:
        raise ConfigError(f"{path}.method", f"expected one of {METHODS}, got {method!r}")
    name = _cfg_get(entry, "name", path, str, default=method)
    kernel = _cfg_get(entry, "kernel", path, str)
    if kernel is not None:
        if kernel not in _KERNEL_NAMES:
            raise ConfigError(f"{path}.kernel", f"expected 'rbf' or 'poly', got {kernel!r}")
        kernel = _KERNEL_NAMES[kernel]
    known = {"name", "method", "kernel", "gamma", "alpha", "beta", "n_atoms", "sparsity",
             "iterations", "train_perc", "train_drop_perc", "base_fraction", "contamination"}
    unknown = set(entry) - known
    if unknown:
        raise ConfigError(f"{path}.{sorted(unknown)[0]}", "unknown field")
    return DetectorSpec(
        name=name,
        method=method,
        kernel=kernel,
        gamma=_cfg_get(entry, "gamma", path, float),
        alpha=_cfg_get(entry, "alpha", path, float, default=1.0),
        beta=_cfg_get(entry, "beta", path, int, default=3),
        n_atoms=_cfg_get(entry, "n_atoms", path, int),
        sparsity=_cfg_get(entry, "sparsity", path, int),
        iterations=_cfg_get(entry, "iterations", path, int),
        train_perc=_cfg_get(entry, "train_perc", path, float),
        train_drop_perc=_cfg_get(entry, "train_drop_perc", path, float),
        base_fraction=_cfg_get(entry, "base_fraction", path, float),
        contamination=_cfg_get(entry, "contamination", path, float, default=0.1),
    )


def load_bench_config(path):
    """Parse and validate a benchmark config file (JSON)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("(file)", f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("(root)", "expected a JSON object")
    seed = _cfg_get(raw, "seed", "(root)", int, default=0)
    rounds = _cfg_get(raw, "rounds", "(root)", int, default=10)
    if rounds < 1:
        raise ConfigError("rounds", "must be >= 1")
    train_fraction = _cfg_get(raw, "train_fraction", "(root)", float, default=0.6)
    if not 0.0 < train_fraction < 1.0:
        raise ConfigError("train_fraction", "must be in (0, 1)")
    out_dir = _cfg_get(raw, "out_dir", "(root)", str, default="bench_out")
    jobs = _cfg_get(raw, "jobs", "(root)", int)
    dataset_entries = _cfg_get(raw, "datasets", "(root)", list, required=True)
    detector_entries = _cfg_get(raw, "detectors", "(root)", list, required=True)
    if not dataset_entries:
        raise ConfigError("datasets", "must not be empty")
    if not detector_entries:
        raise ConfigError("detectors", "must not be empty")
    datasets = [_dataset_from_entry(e, i, seed) for i, e in enumerate(dataset_entries)]
    names = [ds.name for ds in datasets]
    if len(set(names)) != len(names):
        raise ConfigError("datasets", f"dataset names must be distinct, got {names}")
    specs = [_spec_from_entry(e, i) for i, e in enumerate(detector_entries)]
    spec_names = [s.name for s in specs]
    if len(set(spec_names)) != len(spec_names):
        raise ConfigError("detectors", f"detector names must be distinct, got {spec_names}")
    return {
        "seed": seed,
        "rounds": rounds,
        "train_fraction": train_fraction,
        "out_dir": out_dir,
        "jobs": jobs,
        "datasets": datasets,
        "detector_specs": specs,
    }


def cmd_bench(args):
    config = load_bench_config(args.config)
    if args.seed is not None:
        config["seed"] = args.seed
    if args.out is not None:
        config["out_dir"] = args.out
    jobs = args.jobs if args.jobs is not None else config["jobs"]
    if jobs is None:
        jobs = os.cpu_count() or 1
    report = run_benchmark(
        config["datasets"],
        config["detector_specs"],
        rounds=config["rounds"],
        master_seed=config["seed"],
        train_fraction=config["train_fraction"],
        jobs=jobs,
    )
    out_dir = config["out_dir"]
    os.makedirs(out_dir, exist_ok=True)
    report_path = os.path.join(out_dir, "report.json")
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(report_to_json_dict(report), fh, sort_keys=True, indent=2)
        fh.write("\n")
    with open(os.path.join(out_dir, "timings.json"), "w", encoding="utf-8") as fh:
        json.dump(report_timings_dict(report), fh, sort_keys=True, indent=2)
        fh.write("\n")
    tables = format_report_tables(report)
    with open(os.path.join(out_dir, "report.txt"), "w", encoding="utf-8") as fh:
        fh.write(tables)
    print(tables, end="")
    if report.n_failures:
        print(f"{report.n_failures} benchmark cell(s) failed; see {report_path}",
              file=sys.stderr)
        return 1
    print(f"report written to {out_dir}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="anodict",
        description="Anomaly detection by dictionary-learning representation error.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic labeled dataset")
    p_synth.add_argument("--kind", choices=("sparse", "gauss"), required=True)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--out", required=True, help="output CSV path (label last)")
    p_synth.set_defaults(func=cmd_synth)

    p_train = sub.add_parser("train", help="fit a detector and save the model")
    p_train.add_argument("dataset", help="labeled CSV path")
    p_train.add_argument("--method", required=True, choices=METHODS)
    p_train.add_argument("--out", required=True, help="model output path (JSON)")
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--kernel", choices=("rbf", "poly"), default="rbf")
    p_train.add_argument("--gamma", type=float, help="kernel gamma (default scales with 1/m)")
    p_train.add_argument("--alpha", type=float, default=1.0)
    p_train.add_argument("--beta", type=int, default=3)
    p_train.add_argument("--n-atoms", type=int, dest="n_atoms")
    p_train.add_argument("--sparsity", type=int)
    p_train.add_argument("--iters", type=int)
    p_train.add_argument("--train-perc", type=float, dest="train_perc")
    p_train.add_argument("--drop-perc", type=float, dest="drop_perc")
    p_train.add_argument("--base-fraction", type=float, dest="base_fraction")
    p_train.add_argument("--contamination", type=float, default=0.1)
    p_train.add_argument("--label-position", choices=("first", "last"), default="last")
    p_train.add_argument("--synthetic-data", action="store_true",
                         help="use the synthetic-data gamma preset when --gamma is omitted")
    p_train.set_defaults(func=cmd_train)

    p_score = sub.add_parser("score", help="score a dataset with a saved model")
    p_score.add_argument("model", help="model path from 'train'")
    p_score.add_argument("dataset", help="CSV path")
    p_score.add_argument("--out", required=True, help="scores output path, one per line")
    p_score.add_argument("--labels", action="store_true",
                         help="append the predicted 0/1 label to each line")
    p_score.add_argument("--label-position", choices=("first", "last", "none"), default="last")
    p_score.set_defaults(func=cmd_score)

    p_bench = sub.add_parser("bench", help="run a benchmark config")
    p_bench.add_argument("--config", required=True, help="JSON benchmark config")
    p_bench.add_argument("--seed", type=int, help="override the config master seed")
    p_bench.add_argument("--out", help="override the config output directory")
    p_bench.add_argument("--jobs", type=int, help="parallel workers (default: all cores)")
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AnodictError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
