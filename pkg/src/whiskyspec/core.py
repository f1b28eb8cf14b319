"""Spectra, labeled datasets, matrix views and on-disk dataset format.

A dataset directory holds two files:

``spectra.csv``
    header ``sample_id,<wavenumber_0>,...``; one row per spectrum with the
    intensities written as decimal text with 17 significant digits, which
    round-trips IEEE doubles exactly.
``manifest.json``
    grid, brand names, per-sample metadata and free-form attributes
    (preset name, generator seed, hold-out sources, ...).
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .exceptions import EmptyDataset, GridMismatch, InvalidArgument, ParseError

VIAL = "Vial"
BOTTLE = "Bottle"
VESSELS = (VIAL, BOTTLE)

DATASET_FORMAT = "whiskyspec-dataset"
DATASET_VERSION = 1
SPECTRA_FILE = "spectra.csv"
MANIFEST_FILE = "manifest.json"


@dataclass(frozen=True)
class SpectralGrid:
    """Uniformly spaced wavenumber axis in cm^-1."""

    start_wavenumber: float = 270.0
    end_wavenumber: float = 2000.0
    n_points: int = 1024

    def __post_init__(self):
        if not self.start_wavenumber < self.end_wavenumber:
            raise InvalidArgument("grid start must be below grid end")
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise InvalidArgument("grid needs at least 2 points")

    @property
    def spacing(self):
        return (self.end_wavenumber - self.start_wavenumber) / (self.n_points - 1)

    @property
    def wavenumbers(self):
        return np.linspace(self.start_wavenumber, self.end_wavenumber, self.n_points)

    def index_of(self, wavenumber):
        """Index of the grid point closest to ``wavenumber``."""
        i = round((wavenumber - self.start_wavenumber) / self.spacing)
        return int(min(max(i, 0), self.n_points - 1))

    def to_dict(self):
        return {
            "start_wavenumber": self.start_wavenumber,
            "end_wavenumber": self.end_wavenumber,
            "n_points": self.n_points,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(float(d["start_wavenumber"]), float(d["end_wavenumber"]), int(d["n_points"]))


VIAL_GRID = SpectralGrid(270.0, 2000.0, 1024)
BOTTLE_GRID = SpectralGrid(140.0, 2700.0, 1024)


@dataclass(frozen=True)
class SampleMeta:
    sample_id: str
    brand_label: int
    ethanol_vv: float = 0.0
    methanol_vv: float = 0.0
    vessel: str = VIAL
    replicate: int = 0

    def __post_init__(self):
        if not 0.0 <= self.ethanol_vv <= 100.0:
            raise InvalidArgument(f"ethanol_vv out of [0, 100]: {self.ethanol_vv}")
        if not 0.0 <= self.methanol_vv <= 100.0:
            raise InvalidArgument(f"methanol_vv out of [0, 100]: {self.methanol_vv}")
        if self.vessel not in VESSELS:
            raise InvalidArgument(f"unknown vessel {self.vessel!r}")
        if self.replicate < 0 or self.brand_label < 0:
            raise InvalidArgument("replicate and brand_label must be >= 0")

    def to_dict(self):
        return {
            "sample_id": self.sample_id,
            "brand_label": self.brand_label,
            "ethanol_vv": self.ethanol_vv,
            "methanol_vv": self.methanol_vv,
            "vessel": self.vessel,
            "replicate": self.replicate,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            sample_id=str(d["sample_id"]),
            brand_label=int(d["brand_label"]),
            ethanol_vv=float(d["ethanol_vv"]),
            methanol_vv=float(d["methanol_vv"]),
            vessel=str(d["vessel"]),
            replicate=int(d["replicate"]),
        )


@dataclass(frozen=True, eq=False)
class Spectrum:
    grid: SpectralGrid
    intensities: np.ndarray
    meta: SampleMeta

    def __post_init__(self):
        values = np.array(self.intensities, dtype=np.float64)
        if values.ndim != 1 or values.shape[0] != self.grid.n_points:
            raise GridMismatch(
                f"spectrum {self.meta.sample_id}: {values.size} intensities "
                f"for a {self.grid.n_points}-point grid"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidArgument(f"spectrum {self.meta.sample_id} has non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "intensities", values)


class DatasetArrays(NamedTuple):
    X: np.ndarray
    brand: np.ndarray
    ethanol: np.ndarray
    methanol: np.ndarray


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    grid: SpectralGrid
    spectra: tuple
    brand_names: tuple
    attrs: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "spectra", tuple(self.spectra))
        object.__setattr__(self, "brand_names", tuple(self.brand_names))
        for s in self.spectra:
            if s.grid != self.grid:
                raise GridMismatch(f"spectrum {s.meta.sample_id} is on a different grid")
            if s.meta.brand_label >= len(self.brand_names):
                raise InvalidArgument(
                    f"brand label {s.meta.brand_label} has no name "
                    f"({len(self.brand_names)} brands)"
                )

    def __len__(self):
        return len(self.spectra)

    @property
    def n_brands(self):
        return len(self.brand_names)

    @property
    def sample_ids(self):
        return [s.meta.sample_id for s in self.spectra]

    @property
    def vessels(self):
        return np.array([s.meta.vessel for s in self.spectra])

    def subset(self, indices):
        return LabeledDataset(
            self.grid, [self.spectra[i] for i in indices], self.brand_names, dict(self.attrs)
        )


def dataset_to_matrix(ds):
    """Stack a dataset into an ``(n_samples, n_points)`` matrix plus label vectors.

    Row order follows ``ds.spectra``.
    """
    if len(ds.spectra) == 0:
        raise EmptyDataset("dataset has no spectra")
    for s in ds.spectra:
        if s.grid != ds.grid:
            raise GridMismatch(f"spectrum {s.meta.sample_id} is on a different grid")
    X = np.vstack([s.intensities for s in ds.spectra])
    brand = np.array([s.meta.brand_label for s in ds.spectra], dtype=np.int64)
    ethanol = np.array([s.meta.ethanol_vv for s in ds.spectra], dtype=np.float64)
    methanol = np.array([s.meta.methanol_vv for s in ds.spectra], dtype=np.float64)
    return DatasetArrays(X, brand, ethanol, methanol)


def concat_datasets(*datasets, brand_names=None):
    """Concatenate datasets sharing a grid; brand labels are left as they are."""
    if not datasets:
        raise EmptyDataset("nothing to concatenate")
    grid = datasets[0].grid
    spectra = []
    for ds in datasets:
        if ds.grid != grid:
            raise GridMismatch("cannot concatenate datasets on different grids")
        spectra.extend(ds.spectra)
    names = brand_names if brand_names is not None else datasets[0].brand_names
    return LabeledDataset(grid, spectra, names, dict(datasets[0].attrs))


def _fmt(value):
    return format(float(value), ".17g")


def write_dataset(ds, path):
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    with open(path / SPECTRA_FILE, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sample_id"] + [_fmt(w) for w in ds.grid.wavenumbers])
        for s in ds.spectra:
            writer.writerow([s.meta.sample_id] + [_fmt(v) for v in s.intensities])
    manifest = {
        "format": DATASET_FORMAT,
        "version": DATASET_VERSION,
        "grid": ds.grid.to_dict(),
        "brand_names": list(ds.brand_names),
        "samples": [s.meta.to_dict() for s in ds.spectra],
        "attrs": ds.attrs,
    }
    with open(path / MANIFEST_FILE, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return path


def read_manifest(path):
    path = Path(path)
    try:
        with open(path / MANIFEST_FILE, encoding="utf-8") as fh:
            manifest = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{MANIFEST_FILE}: {exc.msg}", exc.lineno) from exc
    if manifest.get("format") != DATASET_FORMAT:
        raise ParseError(f"{MANIFEST_FILE}: not a {DATASET_FORMAT} manifest")
    return manifest


def read_dataset(path):
    path = Path(path)
    manifest = read_manifest(path)
    grid = SpectralGrid.from_dict(manifest["grid"])
    metas = {m["sample_id"]: SampleMeta.from_dict(m) for m in manifest["samples"]}

    with open(path / SPECTRA_FILE, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{SPECTRA_FILE} is empty", 1)
    width = len(rows[0])
    body = rows[1:]
    # A uniform width that disagrees with the manifest is a grid problem,
    # a single odd row is a parse problem.
    if width != grid.n_points + 1 and all(len(r) == width for r in body):
        raise GridMismatch(
            f"manifest grid has {grid.n_points} points, {SPECTRA_FILE} has {width - 1} columns"
        )
    expected_ids = [m["sample_id"] for m in manifest["samples"]]
    if len(body) != len(expected_ids):
        raise GridMismatch(
            f"manifest lists {len(expected_ids)} samples, {SPECTRA_FILE} has {len(body)} rows"
        )
    spectra = []
    for lineno, row in enumerate(body, start=2):
        if len(row) != grid.n_points + 1:
            raise ParseError(
                f"expected {grid.n_points + 1} columns, found {len(row)}", lineno
            )
        sid = row[0]
        if sid not in metas:
            raise ParseError(f"sample {sid!r} missing from manifest", lineno)
        try:
            values = np.array([float(v) for v in row[1:]], dtype=np.float64)
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from exc
        if not np.all(np.isfinite(values)):
            raise ParseError("non-finite intensity", lineno)
        spectra.append(Spectrum(grid, values, metas[sid]))
    if [s.meta.sample_id for s in spectra] != expected_ids:
        raise ParseError(f"{SPECTRA_FILE} row order differs from manifest")
    return LabeledDataset(grid, spectra, manifest["brand_names"], manifest.get("attrs", {}))

