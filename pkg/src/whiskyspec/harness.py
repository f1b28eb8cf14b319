"""Splits, tabular reports and the experiment grids.

Every grid returns a :class:`Report`. Its CSV holds only deterministic
values; wall-clock fit times live in a separate timing table (written only
on request) so the default outputs are byte-identical across reruns.
"""
import csv
import io
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._random import rng_for
from ._validation import check_positive_int
from .classifiers import ClassifierSpec, make_classifier, with_pca
from .core import BOTTLE, VIAL, dataset_to_matrix
from .exceptions import InvalidArgument, StratificationError
from .metrics import accuracy, confusion, r2, rmse
from .neural import SpectralNetClassifier
from .regression import (
    PREPROCESSING,
    CalibrationReport,
    PCRegressor,
    PLSRegressor,
    RidgeRegressor,
    calibrate,
)

BRAND_STRATA = "Brand"
NO_STRATA = "None"

SCHEMES = {
    "60-20-20": (0.6, 0.2, 0.2),
    "70-30": (0.7, 0.3),
    "holdout-sources": None,
}


@dataclass(frozen=True)
class SplitSpec:
    fractions: tuple = (0.7, 0.3)
    stratify_by: str = BRAND_STRATA
    seed: int = 0

    def __post_init__(self):
        fr = tuple(float(f) for f in self.fractions)
        if len(fr) not in (2, 3) or min(fr) <= 0 or abs(sum(fr) - 1.0) > 1e-12:
            raise InvalidArgument(f"split fractions must be 2 or 3 positive values summing to 1, got {fr}")
        if self.stratify_by not in (BRAND_STRATA, NO_STRATA):
            raise InvalidArgument(f"stratify_by must be {BRAND_STRATA!r} or {NO_STRATA!r}")
        object.__setattr__(self, "fractions", fr)


@dataclass(frozen=True)
class Split:
    train: np.ndarray
    test: np.ndarray
    val: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def to_dict(self):
        return {"train": self.train.tolist(), "val": self.val.tolist(), "test": self.test.tolist()}

    @classmethod
    def from_dict(cls, d):
        arr = lambda k: np.asarray(d.get(k, []), dtype=np.int64)
        return cls(arr("train"), arr("test"), arr("val"))


def _allocate(n, fractions):
    """Largest-remainder apportionment of ``n`` items to the given fractions."""
    raw = np.array(fractions) * n
    counts = np.floor(raw).astype(np.int64)
    short = n - counts.sum()
    # stable: equal remainders favour the earlier subset
    order = np.argsort(-(raw - counts), kind="stable")
    counts[order[:short]] += 1
    return counts


def _partition(indices, fractions, rng):
    perm = indices[rng.permutation(indices.size)]
    counts = _allocate(indices.size, fractions)
    bounds = np.concatenate([[0], np.cumsum(counts)])
    return [perm[bounds[i]:bounds[i + 1]] for i in range(len(fractions))]


def split_indices(labels, spec):
    """Disjoint, exhaustive index sets for ``labels`` under ``spec``."""
    labels = np.asarray(labels)
    n = labels.size
    parts = [[] for _ in spec.fractions]
    if spec.stratify_by == BRAND_STRATA:
        for c in np.unique(labels):
            members = np.flatnonzero(labels == c)
            pieces = _partition(members, spec.fractions, rng_for(spec.seed, "split", int(c)))
            for i, p in enumerate(pieces):
                if p.size == 0:
                    raise StratificationError(
                        f"class {c} has {members.size} samples, too few for fractions {spec.fractions}"
                    )
                parts[i].append(p)
    else:
        for i, p in enumerate(_partition(np.arange(n), spec.fractions, rng_for(spec.seed, "split"))):
            parts[i].append(p)
    sets = [np.sort(np.concatenate(p)) for p in parts]
    if len(sets) == 3:
        return Split(train=sets[0], val=sets[1], test=sets[2])
    return Split(train=sets[0], test=sets[1])


def holdout_split(ds):
    """Training sources versus the sources listed in ``attrs["holdout_sources"]``."""
    held = ds.attrs.get("holdout_sources")
    if not held:
        raise InvalidArgument("dataset does not name any hold-out sources")
    labels = np.array([s.meta.brand_label for s in ds.spectra])
    test = np.isin(labels, held)
    if test.all() or not test.any():
        raise StratificationError("hold-out sources must leave both train and test non-empty")
    return Split(train=np.flatnonzero(~test), test=np.flatnonzero(test))


def split_dataset(ds, spec):
    """``spec`` is a :class:`SplitSpec` or the string ``"holdout-sources"``."""
    if spec == "holdout-sources":
        return holdout_split(ds)
    labels = np.array([s.meta.brand_label for s in ds.spectra])
    return split_indices(labels, spec)


def scheme_spec(scheme, seed):
    if scheme not in SCHEMES:
        raise InvalidArgument(f"unknown split scheme {scheme!r}; choose from {sorted(SCHEMES)}")
    if scheme == "holdout-sources":
        return scheme
    return SplitSpec(SCHEMES[scheme], BRAND_STRATA, seed)


# --------------------------------------------------------------------------
# reports


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return f"{value:.4f}"
    return str(value)


@dataclass
class Report:
    name: str
    columns: list
    rows: list = field(default_factory=list)
    timing: list = field(default_factory=list)  # (label, seconds)
    notes: list = field(default_factory=list)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_cell(v) for v in row])
        return buf.getvalue()

    def timing_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["run", "fit_seconds"])
        for label, sec in self.timing:
            w.writerow([label, f"{sec:.3f}"])
        return buf.getvalue()

    def _cells(self):
        return [list(self.columns)] + [[_cell(v) for v in r] for r in self.rows]

    def to_text(self):
        cells = self._cells()
        widths = [max(len(r[j]) for r in cells) for j in range(len(self.columns))]
        lines = []
        for i, r in enumerate(cells):
            lines.append("  ".join(c.ljust(w) if j == 0 else c.rjust(w)
                                   for j, (c, w) in enumerate(zip(r, widths))).rstrip())
            if i == 0:
                lines.append("  ".join("-" * w for w in widths))
        lines.extend(self.notes)
        return "\n".join(lines) + "\n"

    def to_markdown(self):
        cells = self._cells()
        lines = ["| " + " | ".join(cells[0]) + " |",
                 "|" + "|".join("---" for _ in self.columns) + "|"]
        lines += ["| " + " | ".join(r) + " |" for r in cells[1:]]
        if self.notes:
            lines.append("")
            lines.extend(self.notes)
        return "\n".join(lines) + "\n"

    def column(self, name):
        j = self.columns.index(name)
        return [r[j] for r in self.rows]

    def write(self, out_dir, timing=False):
        """Write ``<name>.csv`` and ``<name>.txt``; ``timing`` adds ``<name>_timing.csv``."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / f"{self.name}.csv").write_text(self.to_csv(), encoding="utf-8")
        (out_dir / f"{self.name}.txt").write_text(self.to_text(), encoding="utf-8")
        if timing and self.timing:
            (out_dir / f"{self.name}_timing.csv").write_text(self.timing_csv(), encoding="utf-8")
        return out_dir / f"{self.name}.csv"


def _timed_fit(estimator, X, y, **kw):
    t0 = time.perf_counter()
    estimator.fit(X, y, **kw)
    return time.perf_counter() - t0


# --------------------------------------------------------------------------
# model comparison

DISPLAY_NAMES = {
    "KNN": "KNN",
    "LDA": "LDA",
    "QDA": "QDA",
    "RF": "RF",
    "AdaBoost": "AdaBoost",
    "LinearSVM": "Linear SVM",
    "RbfSVM": "RBF SVM",
    "MLP": "ANN",
}
COMPARISON_MODELS = ("LinearSVM", "RbfSVM", "KNN", "RF", "AdaBoost", "QDA", "LDA", "MLP")
NETWORK_MODELS = ("CNN", "FCN", "HPM")


def make_model(name, pca_k=None, seed=0, epochs=200):
    """Estimator for a classical algorithm or a network architecture, optionally behind PCA."""
    if name in NETWORK_MODELS:
        return SpectralNetClassifier(arch=name, use_pca=pca_k is not None,
                                     n_pca=pca_k or 6, epochs=epochs, seed=seed)
    est = make_classifier(ClassifierSpec(name, seed=seed))
    return with_pca(est, pca_k) if pca_k else est


def run_model_comparison(ds, models=COMPARISON_MODELS, pca_k=6, seed=0, split_seed=0,
                         network_epochs=200):
    """Train/test accuracy for each model with and without a PCA front end.

    Classical models use the stratified 70/30 split; networks use 60/20/20
    and are scored on its test part. A Gaussian-process row is listed as not
    implemented.
    """
    X, y, _, _ = dataset_to_matrix(ds)
    classical = split_indices(y, SplitSpec((0.7, 0.3), BRAND_STRATA, split_seed))
    deep = split_indices(y, SplitSpec((0.6, 0.2, 0.2), BRAND_STRATA, split_seed))
    report = Report("comparison", ["Model", "PCA", "Train accuracy (%)", "Test accuracy (%)"])
    for name in models:
        for k in (None, pca_k):
            sp = deep if name in NETWORK_MODELS else classical
            est = make_model(name, k, seed, network_epochs)
            kw = {}
            if name in NETWORK_MODELS:
                kw = {"X_val": X[sp.val], "y_val": y[sp.val]}
            sec = _timed_fit(est, X[sp.train], y[sp.train], **kw)
            label = DISPLAY_NAMES.get(name, name)
            pca = "yes" if k else "no"
            report.rows.append([label, pca, accuracy(y[sp.train], est.predict(X[sp.train])),
                                accuracy(y[sp.test], est.predict(X[sp.test]))])
            report.timing.append((f"{label} pca={pca}", sec))
    report.rows.append(["Gaussian Process", "-", "not implemented", "not implemented"])
    return report


# --------------------------------------------------------------------------
# epoch sweep


def run_epoch_sweep(ds, epochs_list=(100, 200, 500), models=(("HPM", True),), seed=0, split_seed=0,
                    n_pca=6):
    """Accuracy of each network after training for each epoch budget.

    Every budget starts from a fresh initialisation with the same seed.
    """
    epochs_list = [check_positive_int(e, "epochs") for e in epochs_list]
    if not epochs_list:
        raise InvalidArgument("epochs list is empty")
    X, y, _, _ = dataset_to_matrix(ds)
    sp = split_indices(y, SplitSpec((0.6, 0.2, 0.2), BRAND_STRATA, split_seed))
    report = Report("epochs", ["Model", "Epochs", "Train accuracy (%)", "Validation accuracy (%)",
                               "Test accuracy (%)"])
    for arch, use_pca in models:
        label = ("PCA+" if use_pca else "") + arch
        for epochs in epochs_list:
            est = SpectralNetClassifier(arch=arch, use_pca=use_pca, n_pca=n_pca, epochs=epochs, seed=seed)
            sec = _timed_fit(est, X[sp.train], y[sp.train], X_val=X[sp.val], y_val=y[sp.val])
            report.rows.append([label, epochs,
                                accuracy(y[sp.train], est.predict(X[sp.train])),
                                accuracy(y[sp.val], est.predict(X[sp.val])),
                                accuracy(y[sp.test], est.predict(X[sp.test]))])
            report.timing.append((f"{label} epochs={epochs}", sec))
    return report


# --------------------------------------------------------------------------
# PCA feature sweep


def run_feature_sweep(ds, k_range=range(1, 10), repeats=6, classifier="MLP", seed=0):
    """Test accuracy against the number of PCA features, mean and std over repeats.

    Repeat ``r`` draws its own 70/30 split and model seed from ``(seed, r)``.
    """
    k_values = list(k_range)
    if not k_values:
        raise InvalidArgument("k_range is empty")
    for k in k_values:
        check_positive_int(k, "k")
    repeats = check_positive_int(repeats, "repeats")
    X, y, _, _ = dataset_to_matrix(ds)
    splits = [split_indices(y, SplitSpec((0.7, 0.3), BRAND_STRATA,
                                         int(rng_for(seed, "feature-sweep", r).integers(2 ** 31))))
              for r in range(repeats)]
    report = Report("features", ["PCA features", "Mean test accuracy (%)", "Std (%)", "Repeats"])
    for k in k_values:
        accs = []
        for r, sp in enumerate(splits):
            est = make_model(classifier, k, seed + r)
            sec = _timed_fit(est, X[sp.train], y[sp.train])
            accs.append(accuracy(y[sp.test], est.predict(X[sp.test])))
            report.timing.append((f"k={k} repeat={r}", sec))
        report.rows.append([k, float(np.mean(accs)), float(np.std(accs, ddof=1)) if repeats > 1 else 0.0,
                            repeats])
    return report


# --------------------------------------------------------------------------
# vial / bottle transfer grid

TRANSFER_CELLS = ("VV", "TT", "VT", "TV", "Mix")
TRANSFER_MODELS = (
    ("KNN", None), ("LDA", None), ("MLP", None), ("RF", None), ("RbfSVM", None),
    ("KNN", 6), ("LDA", 6), ("MLP", 6), ("RF", 6), ("RbfSVM", 6),
)


@dataclass
class GridReport:
    """Accuracy per (model, cell) as ``(train, test)`` pairs, plus the tabular form."""

    models: list
    cells: tuple
    accuracy: dict  # (model label, cell) -> (train %, test %)
    report: Report


def transfer_splits(ds, seed=0):
    """Train/test index sets per cell. ``V``/``T`` are vial/bottle spectra.

    The vial and bottle sets are each split 70/30 by brand; cross-vessel cells
    train on one vessel's training part and test on the other's test part.
    ``Mix`` is a stratified 70/30 split of all spectra.
    """
    labels = np.array([s.meta.brand_label for s in ds.spectra])
    vessels = ds.vessels
    if not (np.any(vessels == VIAL) and np.any(vessels == BOTTLE)):
        raise InvalidArgument("transfer grid needs both vial and bottle spectra")
    halves = {}
    for code, vessel in (("V", VIAL), ("T", BOTTLE)):
        idx = np.flatnonzero(vessels == vessel)
        sp = split_indices(labels[idx], SplitSpec((0.7, 0.3), BRAND_STRATA,
                                                  int(rng_for(seed, "transfer", code).integers(2 ** 31))))
        halves[code] = (idx[sp.train], idx[sp.test])
    mix = split_indices(labels, SplitSpec((0.7, 0.3), BRAND_STRATA,
                                          int(rng_for(seed, "transfer", "Mix").integers(2 ** 31))))
    out = {}
    for cell in TRANSFER_CELLS[:4]:
        out[cell] = (halves[cell[0]][0], halves[cell[1]][1])
    out["Mix"] = (mix.train, mix.test)
    return out


def model_label(name, pca_k):
    base = DISPLAY_NAMES.get(name, name)
    return f"PCA+{base}" if pca_k else base


def run_transfer_grid(ds, models=TRANSFER_MODELS, cells=TRANSFER_CELLS, seed=0):
    for c in cells:
        if c not in TRANSFER_CELLS:
            raise InvalidArgument(f"unknown transfer cell {c!r}")
    X, y, _, _ = dataset_to_matrix(ds)
    splits = transfer_splits(ds, seed)
    acc = {}
    timing = []
    labels = []
    fitted = {}
    for name, k in models:
        label = model_label(name, k)
        labels.append(label)
        for cell in cells:
            tr, te = splits[cell]
            # VV/VT and TT/TV share a training set, so reuse the fit
            key = (label, cell[0] if cell != "Mix" else "Mix")
            if key not in fitted:
                est = make_model(name, k, seed)
                sec = _timed_fit(est, X[tr], y[tr])
                fitted[key] = est
                timing.append((f"{label} train={key[1]}", sec))
            est = fitted[key]
            acc[label, cell] = (accuracy(y[tr], est.predict(X[tr])), accuracy(y[te], est.predict(X[te])))
    report = Report("transfer", ["Model"] + list(cells), timing=timing,
                    notes=["cells are train/test accuracy (%); V = vial, T = bottle, "
                           "first letter = training vessel"])
    for label in labels:
        report.rows.append([label] + [f"{acc[label, c][0]:.1f}/{acc[label, c][1]:.1f}" for c in cells])
    return GridReport(labels, tuple(cells), acc, report)


# --------------------------------------------------------------------------
# single-model evaluation


@dataclass
class EvalReport:
    """Scores of one fitted model on one split.

    Brand tasks fill ``accuracy`` and ``confusion`` (rows are true classes in
    ``classes`` order); concentration tasks fill ``r2`` and ``rmse``.
    """

    model: str
    task: str
    split: str
    n_samples: int
    accuracy: float = None
    r2: float = None
    rmse: float = None
    confusion: np.ndarray = None
    classes: list = None
    fit_seconds: float = None

    COLUMNS = ("model", "task", "split", "n_samples", "accuracy", "r2", "rmse")

    def to_report(self, name="eval"):
        row = [self.model, self.task, self.split, self.n_samples, self.accuracy, self.r2, self.rmse]
        return Report(name, list(self.COLUMNS), [row])

    def confusion_report(self, name="confusion"):
        labels = [str(c) for c in self.classes]
        rows = [[lbl] + [int(v) for v in r] for lbl, r in zip(labels, self.confusion)]
        return Report(name, ["true/predicted"] + labels, rows)


def evaluate(model, X, y, task, model_name="", split="test"):
    """Score ``model`` on ``(X, y)``; ``task`` is ``"brand"`` or a concentration head."""
    pred = model.predict(X)
    if task == "brand":
        classes = np.unique(np.concatenate([np.asarray(y), np.asarray(pred)]))
        lookup = {c: i for i, c in enumerate(classes.tolist())}
        enc = lambda v: np.array([lookup[c] for c in np.asarray(v).tolist()])
        return EvalReport(model_name, task, split, len(y), accuracy=accuracy(y, pred),
                          confusion=confusion(enc(y), enc(pred), len(classes)),
                          classes=classes.tolist())
    return EvalReport(model_name, task, split, len(y), r2=r2(y, pred), rmse=rmse(y, pred))


# --------------------------------------------------------------------------
# methanol calibration table

CALIBRATION_METHODS = (
    *(("PCR", 6, v) for v in PREPROCESSING),
    *(("PLSR", 5, v) for v in PREPROCESSING),
    ("Ridge", 0.1, "mean-centering"),
    ("Ridge", 0.2, "mean-centering"),
    ("Ridge", 0.3, "mean-centering"),
)


def make_regressor(method, size, preprocessing):
    if method == "PCR":
        return PCRegressor(int(size), preprocessing)
    if method == "PLSR":
        return PLSRegressor(int(size), preprocessing)
    if method == "Ridge":
        return RidgeRegressor(float(size), preprocessing)
    raise InvalidArgument(f"unknown regression method {method!r}")


def run_calibration_table(train_ds, test_ds, methods=CALIBRATION_METHODS, n_folds=5):
    """Methanol calibration statistics for each (method, size, preprocessing) row."""
    X, _, _, y = dataset_to_matrix(train_ds)
    Xt, _, _, yt = dataset_to_matrix(test_ds)
    report = Report("calibration", ["Method", "Parameter", "Preprocessing", *CalibrationReport.COLUMNS])
    for method, size, prep in methods:
        t0 = time.perf_counter()
        _, cal = calibrate(make_regressor(method, size, prep), X, y, Xt, yt, n_folds)
        param = f"{size} LVs" if method == "PLSR" else (f"{size} PCs" if method == "PCR" else f"k = {size}")
        report.rows.append([method, param, prep, *cal.values()])
        report.timing.append((f"{method} {param} {prep}", time.perf_counter() - t0))
    return report
