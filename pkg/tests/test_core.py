import numpy as np
import pytest

from whiskyspec.core import (
    VIAL,
    VIAL_GRID,
    LabeledDataset,
    SampleMeta,
    SpectralGrid,
    Spectrum,
    dataset_to_matrix,
    read_dataset,
    write_dataset,
)
from whiskyspec.exceptions import EmptyDataset, GridMismatch, InvalidArgument, ParseError


def _dataset(n=3, points=5, grid=None):
    grid = grid or SpectralGrid(100.0, 500.0, points)
    rng = np.random.default_rng(0)
    spectra = [
        Spectrum(grid, rng.random(grid.n_points),
                 SampleMeta(f"s{i}", i % 2, 40.0 + i, 0.1 * i, VIAL, i))
        for i in range(n)
    ]
    return LabeledDataset(grid, spectra, ["a", "b"])


def test_matrix_rows_follow_input_order():
    ds = _dataset(2, 5)
    X, brand, ethanol, _ = dataset_to_matrix(ds)
    assert X.shape == (2, 5)
    np.testing.assert_array_equal(X[1], ds.spectra[1].intensities)
    np.testing.assert_array_equal(brand, [0, 1])
    np.testing.assert_array_equal(ethanol, [40.0, 41.0])


def test_empty_dataset_rejected():
    with pytest.raises(EmptyDataset):
        dataset_to_matrix(LabeledDataset(VIAL_GRID, [], ["a"]))


def test_mixed_grids_rejected():
    ds = _dataset(1)
    other = Spectrum(SpectralGrid(0.0, 10.0, 5), np.zeros(5), SampleMeta("x", 0, 40.0, 0.0, VIAL))
    with pytest.raises(GridMismatch):
        LabeledDataset(ds.grid, [*ds.spectra, other], ["a", "b"])


def test_label_without_name_rejected():
    grid = SpectralGrid(0.0, 1.0, 3)
    with pytest.raises(InvalidArgument):
        LabeledDataset(grid, [Spectrum(grid, np.zeros(3), SampleMeta("x", 4, 40.0, 0.0, VIAL))], ["a"])


def test_brand_id_matrix_shape(brand_id):
    X, y, _, _ = dataset_to_matrix(brand_id)
    assert X.shape == (1120, 1024)
    assert np.bincount(y).tolist() == [40] * 28


def test_roundtrip_is_exact(tmp_path):
    ds = _dataset(3)
    write_dataset(ds, tmp_path / "d")
    back = read_dataset(tmp_path / "d")
    np.testing.assert_array_equal(dataset_to_matrix(back).X, dataset_to_matrix(ds).X)
    assert back.sample_ids == ds.sample_ids
    assert [s.meta for s in back.spectra] == [s.meta for s in ds.spectra]


def test_short_row_is_parse_error_with_line(tmp_path):
    write_dataset(_dataset(3), tmp_path)
    path = tmp_path / "spectra.csv"
    lines = path.read_text().splitlines()
    lines[2] = ",".join(lines[2].split(",")[:-1])
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ParseError) as err:
        read_dataset(tmp_path)
    assert err.value.line == 3


def test_manifest_point_count_disagreement(tmp_path):
    ds = _dataset(2, points=6)
    write_dataset(ds, tmp_path)
    path = tmp_path / "spectra.csv"
    rows = [",".join(r.split(",")[:-1]) for r in path.read_text().splitlines()]
    path.write_text("\n".join(rows) + "\n")
    with pytest.raises(GridMismatch):
        read_dataset(tmp_path)


def test_non_numeric_value(tmp_path):
    write_dataset(_dataset(2), tmp_path)
    path = tmp_path / "spectra.csv"
    text = path.read_text().splitlines()
    cells = text[1].split(",")
    cells[2] = "abc"
    text[1] = ",".join(cells)
    path.write_text("\n".join(text) + "\n")
    with pytest.raises(ParseError):
        read_dataset(tmp_path)
