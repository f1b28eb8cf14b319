"""``whiskyspec`` command line.

Exit status is 0 on success, 1 for bad input (unknown flags, missing files,
validation errors, model schema mismatches) and 2 for numerical failures.
Every random choice derives from ``--seed`` through named sub-seeds, so
reruns with the same flags write byte-identical files.
"""
import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import harness
from .classifiers import CLI_NAMES
from .core import dataset_to_matrix, read_dataset, write_dataset
from .exceptions import GridMismatch, InvalidArgument, NumericalError, ValidationError
from .neural import SpectralNetClassifier, SpectralNetRegressor
from .regression import PREPROCESSING, detection_limit
from .serialization import load_model, save_model
from .synthgen import CLI_PRESET_NAMES, DatasetConfig, load_dataset_config, synth_paper_shaped_dataset

NETWORK_NAMES = {"fcn": "FCN", "cnn": "CNN", "hpm": "HPM"}
REGRESSOR_NAMES = {"pcr": "PCR", "plsr": "PLSR", "ridge": "Ridge"}
MODEL_CHOICES = [*CLI_NAMES, *NETWORK_NAMES, *REGRESSOR_NAMES]
TARGETS = ("brand", "ethanol", "methanol")
SPLIT_SCHEMES = [*harness.SCHEMES, "all"]
GRID_KINDS = ("comparison", "epochs", "features", "transfer", "calibration")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Argument errors print usage and exit 1 instead of argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise _UsageError(message)


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _existing_dir(path):
    p = Path(path)
    if not p.is_dir():
        raise InvalidArgument(f"dataset directory {path} does not exist")
    return p


def _existing_file(path):
    p = Path(path)
    if not p.is_file():
        raise InvalidArgument(f"file {path} does not exist")
    return p


# --------------------------------------------------------------------------
# helpers shared by train / eval / lod


def _targets(ds, task):
    arrays = dataset_to_matrix(ds)
    y = {"brand": arrays.brand, "ethanol": arrays.ethanol, "methanol": arrays.methanol}[task]
    return arrays.X, y


def _default_scheme(model, ds):
    if model in REGRESSOR_NAMES:
        return "holdout-sources" if ds.attrs.get("holdout_sources") else "all"
    return "60-20-20" if model in NETWORK_NAMES else "70-30"


def _split(ds, scheme, seed):
    if scheme == "all":
        return harness.Split(train=np.arange(len(ds)), test=np.arange(len(ds)))
    return harness.split_dataset(ds, harness.scheme_spec(scheme, seed))


def _eval_indices(ds, meta, name):
    """Rows of ``ds`` in split ``name`` as the model's training run defined it."""
    scheme = meta.get("scheme", "all")
    if scheme == "all" or name == "all":
        return np.arange(len(ds))
    idx = getattr(_split(ds, scheme, meta.get("split_seed", 0)), name)
    if idx.size == 0:
        raise InvalidArgument(f"split {name!r} is empty under scheme {scheme!r}")
    return idx


def _build_model(args, task):
    m = args.model
    if m in CLI_NAMES:
        if task != "brand":
            raise InvalidArgument(f"{m} is a classifier; use --target brand")
        return harness.make_model(CLI_NAMES[m], args.pca, args.seed)
    if m in NETWORK_NAMES:
        common = dict(arch=NETWORK_NAMES[m], use_pca=args.pca is not None, n_pca=args.pca or 6,
                      epochs=args.epochs, batch_size=args.batch_size, seed=args.seed)
        if task == "brand":
            return SpectralNetClassifier(**common)
        return SpectralNetRegressor(target=task, **common)
    if task == "brand":
        raise InvalidArgument(f"{m} is a regressor; use --target ethanol or --target methanol")
    if args.pca is not None:
        raise InvalidArgument("--pca does not apply to pcr/plsr/ridge; use --components")
    if m == "ridge":
        size = args.ridge_k
    else:
        size = args.components if args.components is not None else (6 if m == "pcr" else 5)
    return harness.make_regressor(REGRESSOR_NAMES[m], size, args.preprocessing)


# --------------------------------------------------------------------------
# subcommands


def cmd_gen(args):
    cfg = load_dataset_config(args.config) if args.config else DatasetConfig()
    overrides = {"preset": CLI_PRESET_NAMES[args.preset], "seed": args.seed}
    if args.replicates is not None:
        overrides["replicates"] = args.replicates
    if args.n_brands is not None:
        overrides["n_brands"] = args.n_brands
    ds = synth_paper_shaped_dataset(cfg, **overrides)
    write_dataset(ds, args.out)
    print(f"wrote {len(ds)} spectra ({ds.n_brands} labels) to {args.out}")


def cmd_split(args):
    ds = read_dataset(_existing_dir(args.dataset))
    split = _split(ds, args.scheme, args.seed)
    record = {"scheme": args.scheme, "seed": args.seed,
              "sizes": {k: len(v) for k, v in split.to_dict().items()}, **split.to_dict()}
    text = json.dumps(record, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"train/val/test = {len(split.train)}/{len(split.val)}/{len(split.test)}; wrote {args.out}")
    else:
        sys.stdout.write(text)


def cmd_train(args):
    ds = read_dataset(_existing_dir(args.dataset))
    task = args.target or ("methanol" if args.model in REGRESSOR_NAMES else "brand")
    scheme = args.scheme or _default_scheme(args.model, ds)
    split = _split(ds, scheme, args.split_seed)
    X, y = _targets(ds, task)
    model = _build_model(args, task)
    tr = split.train
    if args.model in NETWORK_NAMES and split.val.size:
        model.fit(X[tr], y[tr], X_val=X[split.val], y_val=y[split.val])
    else:
        model.fit(X[tr], y[tr])
    meta = {"model": args.model, "scheme": scheme, "split_seed": args.split_seed,
            "seed": args.seed, "n_train": int(tr.size)}
    save_model(args.out, model, task, ds.grid, meta)
    if args.trace and args.model in NETWORK_NAMES:
        Path(args.trace).write_text(model.trace_.to_csv(), encoding="utf-8")
    print(f"trained {args.model} ({task}) on {tr.size} spectra; wrote {args.out}")


def _load_for_dataset(model_path, dataset_path):
    model, task, grid, meta = load_model(_existing_file(model_path))
    ds = read_dataset(_existing_dir(dataset_path))
    if grid is not None and grid != ds.grid:
        raise GridMismatch("dataset grid differs from the grid the model was trained on")
    return model, task, meta, ds


def cmd_eval(args):
    model, task, meta, ds = _load_for_dataset(args.model, args.dataset)
    idx = _eval_indices(ds, meta, args.split)
    X, y = _targets(ds, task)
    rep = harness.evaluate(model, X[idx], y[idx], task, meta.get("model", ""), args.split)
    table = rep.to_report(Path(args.report).stem if args.report else "eval")
    if args.report:
        out = Path(args.report)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(table.to_csv(), encoding="utf-8")
        if rep.confusion is not None:
            conf = out.with_name(out.stem + "_confusion.csv")
            conf.write_text(rep.confusion_report().to_csv(), encoding="utf-8")
    sys.stdout.write(table.to_text())


def cmd_lod(args):
    model, task, meta, ds = _load_for_dataset(args.model, args.dataset)
    if task == "brand":
        raise InvalidArgument("detection limits need a concentration model (ethanol or methanol)")
    idx = _eval_indices(ds, meta, args.split)
    X, y = _targets(ds, task)
    lod = detection_limit(y[idx], model.predict(X[idx]))
    print(f"detection limit ({task}, {args.split}, n={idx.size}): {lod:.4f} % v/v")


def _grid_dataset(args, preset):
    if args.dataset:
        return read_dataset(_existing_dir(args.dataset))
    return synth_paper_shaped_dataset(preset=preset, seed=args.data_seed)


def _comparison_models(names):
    out = []
    for n in names:
        if n in CLI_NAMES:
            out.append(CLI_NAMES[n])
        elif n in NETWORK_NAMES:
            out.append(NETWORK_NAMES[n])
        else:
            raise InvalidArgument(f"unknown model {n!r} for the comparison grid")
    return tuple(out)


def _network_models(names):
    out = []
    for n in names:
        pca = n.startswith("pca-")
        base = n[4:] if pca else n
        if base not in NETWORK_NAMES:
            raise InvalidArgument(f"unknown network {n!r}; use fcn/cnn/hpm, optionally prefixed pca-")
        out.append((NETWORK_NAMES[base], pca))
    return tuple(out)


def cmd_grid(args):
    if args.kind == "comparison":
        names = args.models.split(",") if args.models else [
            "svm-linear", "svm-rbf", "knn", "rf", "adaboost", "qda", "lda", "mlp"]
        report = harness.run_model_comparison(
            _grid_dataset(args, "BrandID"), _comparison_models(names), seed=args.seed,
            split_seed=args.seed, network_epochs=args.network_epochs)
    elif args.kind == "epochs":
        names = args.models.split(",") if args.models else ["pca-fcn", "pca-cnn", "pca-hpm"]
        report = harness.run_epoch_sweep(_grid_dataset(args, "BrandID"), args.epochs,
                                         _network_models(names), seed=args.seed, split_seed=args.seed)
    elif args.kind == "features":
        report = harness.run_feature_sweep(_grid_dataset(args, "BrandID"), range(1, args.max_features + 1),
                                           args.repeats, seed=args.seed)
    elif args.kind == "transfer":
        report = harness.run_transfer_grid(_grid_dataset(args, "ThroughBottle"), seed=args.seed).report
    else:
        ds = _grid_dataset(args, "Methanol")
        split = harness.holdout_split(ds)
        report = harness.run_calibration_table(ds.subset(split.train), ds.subset(split.test))
    path = report.write(args.out, timing=args.timing)
    sys.stdout.write(report.to_text())
    print(f"wrote {path}")


def _read_table(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InvalidArgument(f"{path} is empty")
    return harness.Report(path.stem, rows[0], rows[1:])


def cmd_report(args):
    src = _existing_dir(args.inp)
    tables = [_read_table(p) for p in sorted(src.glob("*.csv"))]
    if not tables:
        raise InvalidArgument(f"no CSV reports in {src}")
    parts = []
    for t in tables:
        if args.format == "md":
            parts.append(f"## {t.name}\n\n{t.to_markdown()}")
        else:
            parts.append(f"# {t.name}\n{t.to_csv()}")
    text = "\n".join(parts)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# parser


def build_parser():
    p = _Parser(prog="whiskyspec", description="Synthetic whisky Raman spectra: generation, "
                "classification, calibration and the experiment grids.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a synthetic dataset directory")
    g.add_argument("--preset", required=True, choices=sorted(CLI_PRESET_NAMES))
    g.add_argument("--seed", type=int, default=7)
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--config", help="JSON dataset/generator config; --preset and --seed override it")
    g.add_argument("--replicates", type=int)
    g.add_argument("--n-brands", type=int)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("split", help="print the train/val/test index sets as JSON")
    s.add_argument("--dataset", required=True)
    s.add_argument("--scheme", required=True, choices=SPLIT_SCHEMES)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", help="write the JSON here instead of stdout")
    s.set_defaults(func=cmd_split)

    t = sub.add_parser("train", help="fit a model and save it as JSON")
    t.add_argument("--model", required=True, choices=MODEL_CHOICES)
    t.add_argument("--dataset", required=True)
    t.add_argument("--out", required=True, help="model JSON path")
    t.add_argument("--pca", type=int, metavar="K", help="project onto K principal components first")
    t.add_argument("--epochs", type=int, default=200, help="network training epochs")
    t.add_argument("--batch-size", type=int, default=32)
    t.add_argument("--target", choices=TARGETS,
                   help="what to predict (default: brand, or methanol for pcr/plsr/ridge)")
    t.add_argument("--scheme", choices=SPLIT_SCHEMES,
                   help="default: 60-20-20 for networks, 70-30 for classifiers, "
                        "holdout-sources (or all) for pcr/plsr/ridge")
    t.add_argument("--split-seed", type=int, default=0)
    t.add_argument("--seed", type=int, default=0, help="model seed")
    t.add_argument("--components", type=int, help="PCs for pcr, latent variables for plsr")
    t.add_argument("--ridge-k", type=float, default=0.1)
    t.add_argument("--preprocessing", choices=PREPROCESSING, default="mean-centering")
    t.add_argument("--trace", help="write the per-epoch training trace CSV (networks)")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="score a saved model on a split of a dataset")
    e.add_argument("--model", required=True)
    e.add_argument("--dataset", required=True)
    e.add_argument("--split", choices=("train", "val", "test", "all"), default="test")
    e.add_argument("--report", help="CSV path for the score row")
    e.set_defaults(func=cmd_eval)

    r = sub.add_parser("grid", help="run an experiment grid and write its report")
    r.add_argument("--kind", required=True, choices=GRID_KINDS)
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--dataset", help="dataset directory (default: generate the matching preset)")
    r.add_argument("--data-seed", type=int, default=7, help="seed for the generated dataset")
    r.add_argument("--seed", type=int, default=0, help="master seed for splits and models")
    r.add_argument("--models", help="comma-separated model names")
    r.add_argument("--epochs", type=_int_list, default=[100, 200, 500], help="epoch budgets, e.g. 100,200")
    r.add_argument("--network-epochs", type=int, default=200, help="epochs for networks in the comparison")
    r.add_argument("--repeats", type=int, default=6)
    r.add_argument("--max-features", type=int, default=9)
    r.add_argument("--timing", action="store_true", help="also write <kind>_timing.csv")
    r.set_defaults(func=cmd_grid)

    d = sub.add_parser("lod", help="print the detection limit of a concentration model")
    d.add_argument("--model", required=True)
    d.add_argument("--dataset", required=True)
    d.add_argument("--split", choices=("train", "val", "test", "all"), default="test")
    d.set_defaults(func=cmd_lod)

    o = sub.add_parser("report", help="render the CSV reports in a directory")
    o.add_argument("--in", dest="inp", required=True)
    o.add_argument("--format", choices=("csv", "md"), default="md")
    o.add_argument("--out")
    o.set_defaults(func=cmd_report)
    return p


def run_cli(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError:
        return 1
    except SystemExit as exc:  # --help
        return 0 if exc.code in (0, None) else 1
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
