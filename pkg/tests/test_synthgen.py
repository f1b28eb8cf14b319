from dataclasses import replace

import numpy as np
import pytest

from whiskyspec.core import BOTTLE, BOTTLE_GRID, VIAL, SpectralGrid, dataset_to_matrix
from whiskyspec.exceptions import InvalidArgument
from whiskyspec.synthgen import (
    DEFAULT_CONFIG,
    METHANOL_TRAIN_LEVELS,
    BrandProfile,
    DatasetConfig,
    GeneratorConfig,
    PeakSpec,
    apply_photobleach,
    apply_vessel,
    noiseless_matrix,
    reference_profile,
    render_parts,
    sample_brand_profiles,
    synth_paper_shaped_dataset,
    synth_parts,
    water_profile,
)

NOISELESS_VIAL = DEFAULT_CONFIG.acquisition(VIAL).noiseless()


def test_profiles_are_deterministic():
    assert sample_brand_profiles(28, 7) == sample_brand_profiles(28, 7)
    assert sample_brand_profiles(28, 7) != sample_brand_profiles(28, 8)


def test_single_profile_ethanol_range():
    (p,) = sample_brand_profiles(1, 123)
    assert 40.0 <= p.base_ethanol_vv <= 63.0


@pytest.mark.parametrize("n", [0, -3, 2.5])
def test_bad_brand_count(n):
    with pytest.raises(InvalidArgument):
        sample_brand_profiles(n, 0)


def test_noiseless_brands_pairwise_distinct():
    M = noiseless_matrix(sample_brand_profiles(28, 7))
    d = np.sqrt(((M[:, None, :] - M[None, :, :]) ** 2).sum(axis=2))
    off = d[~np.eye(28, dtype=bool)]
    assert off.min() > 0


def test_methanol_changes_only_its_band():
    p = sample_brand_profiles(1, 5)[0]
    grid = SpectralGrid(270.0, 2000.0, 1024)
    a = synth_parts(p, 45.0, 0.0, NOISELESS_VIAL, grid).total
    b = synth_parts(p, 45.0, 1.0, NOISELESS_VIAL, grid).total
    m = DEFAULT_CONFIG.methanol_peak
    outside = np.abs(grid.wavenumbers - m.center) > 3 * m.width
    assert np.max(np.abs(a - b)[outside]) < 1e-12
    assert np.max(np.abs(a - b)[~outside]) > 1e-3


def test_no_ethanol_means_no_ethanol_bands():
    water = water_profile(0)
    centers = [pk.center for pk in DEFAULT_CONFIG.ethanol_peaks]
    grid = SpectralGrid(min(centers), max(centers), 2)
    assert np.all(render_parts(water, 0.0, 0.0, grid).raman == 0.0)


def test_ethanol_band_scales_linearly():
    # 884 cm^-1 is the tallest ethanol band (amplitude 1 at 40 % v/v); the
    # next band is more than 3 FWHM away, so the height is exactly v/40.
    grid = SpectralGrid(800.0, 968.0, 3)
    water = water_profile(0)
    for v in (10.0, 25.0, 40.0):
        h = render_parts(water, v, 0.0, grid).raman[1]
        assert h == pytest.approx(v / 40.0, abs=1e-15)
        h2 = render_parts(water, 2 * v, 0.0, grid).raman[1]
        assert h2 == pytest.approx(2 * h, rel=1e-15)


def _bleach_loss(exposure):
    ref = reference_profile()
    grid = SpectralGrid(1246.0, 1246.0 + 1.0, 2)
    acq0 = replace(NOISELESS_VIAL, exposure_s=0.0)
    acq = replace(NOISELESS_VIAL, exposure_s=exposure)
    before = synth_parts(ref, ref.base_ethanol_vv, 0.0, acq0, grid).total[0]
    after = synth_parts(ref, ref.base_ethanol_vv, 0.0, acq, grid).total[0]
    return 100.0 * (1.0 - after / before)


def test_photobleach_zero_exposure_is_identity():
    parts = render_parts(reference_profile(), 45.0, 0.0)
    assert apply_photobleach(parts, 0.0) is parts


def test_photobleach_rejects_negative_exposure():
    with pytest.raises(InvalidArgument):
        apply_photobleach(render_parts(reference_profile(), 45.0, 0.0), -1.0)


def test_photobleach_calibration_points():
    assert _bleach_loss(900.0) == pytest.approx(3.0, abs=0.1)
    assert _bleach_loss(60.0) == pytest.approx(0.2, abs=0.05)


def test_bottle_adds_glass_bands():
    p = sample_brand_profiles(1, 2)[0]
    parts = render_parts(p, 45.0, 0.0, BOTTLE_GRID)
    vial = apply_vessel(parts, VIAL).total
    bottle = apply_vessel(parts, BOTTLE).total
    wn = BOTTLE_GRID.wavenumbers
    glass = np.abs(wn - 550.0) < 100
    assert np.all(bottle[glass] >= vial[glass])
    assert not np.isclose(bottle.sum(), vial.sum())


def test_unknown_vessel():
    with pytest.raises(InvalidArgument):
        apply_vessel(render_parts(reference_profile(), 45.0, 0.0), "Jar")


def test_invalid_peaks_and_profiles():
    with pytest.raises(InvalidArgument):
        PeakSpec(1000.0, 0.0, 1.0)
    with pytest.raises(InvalidArgument):
        PeakSpec(1000.0, 10.0, 1.0, "Voigt")
    with pytest.raises(InvalidArgument):
        BrandProfile(0, (), (PeakSpec(1000.0, 50.0, 1.0),), 40.0)
    with pytest.raises(InvalidArgument):
        render_parts(reference_profile(), 120.0, 0.0)


def test_peaks_vanish_beyond_three_widths():
    pk = PeakSpec(1000.0, 10.0, 2.0)
    assert pk.evaluate([1000.0])[0] == 2.0
    assert pk.evaluate([1030.0, 970.0, 1100.0]).tolist() == [0.0, 0.0, 0.0]


def test_preset_sizes(brand_id):
    assert len(brand_id) == 1120
    train = synth_paper_shaped_dataset(preset="MethanolTrain", seed=7, replicates=2)
    assert len(train) == 3 * 11 * 2
    assert sorted({s.meta.methanol_vv for s in train.spectra}) == list(METHANOL_TRAIN_LEVELS)
    assert METHANOL_TRAIN_LEVELS[-1] == 3.0
    bottle = synth_paper_shaped_dataset(preset="ThroughBottle", seed=7)
    assert len(bottle) == 7 * 30 * 2
    assert (bottle.vessels == BOTTLE).sum() == 210


def test_unknown_preset():
    with pytest.raises(InvalidArgument):
        DatasetConfig(preset="Gin")


def test_combined_methanol_matches_separate_presets():
    combined = synth_paper_shaped_dataset(preset="Methanol", seed=4, replicates=2)
    train = synth_paper_shaped_dataset(preset="MethanolTrain", seed=4, replicates=2)
    test = synth_paper_shaped_dataset(preset="MethanolTest", seed=4, replicates=2)
    X = dataset_to_matrix(combined).X
    np.testing.assert_array_equal(X, np.vstack([dataset_to_matrix(train).X, dataset_to_matrix(test).X]))
    assert combined.attrs["holdout_sources"] == [3, 4]


def test_datasets_are_bit_identical_per_seed():
    a = synth_paper_shaped_dataset(preset="BrandID", seed=9, n_brands=3, replicates=4)
    b = synth_paper_shaped_dataset(preset="BrandID", seed=9, n_brands=3, replicates=4)
    np.testing.assert_array_equal(dataset_to_matrix(a).X, dataset_to_matrix(b).X)
    c = synth_paper_shaped_dataset(preset="BrandID", seed=10, n_brands=3, replicates=4)
    assert not np.array_equal(dataset_to_matrix(a).X, dataset_to_matrix(c).X)


def test_config_roundtrip():
    cfg = GeneratorConfig(class_separation=0.5, noise_rel=0.01)
    assert GeneratorConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(InvalidArgument):
        GeneratorConfig.from_dict({"bogus": 1})
