"""Synthetic Raman-like whisky spectra.

Each spectrum is assembled from three additive parts:

* ``raman``: ethanol peaks scaled by ``ethanol_vv / 40``, a methanol C-O peak
  at 1020 cm^-1 scaled by ``methanol_vv``, and brand congener peaks;
* ``fluorescence``: broad Gaussian background, the part that photobleaches;
* ``background``: vessel glass contribution.

Noise (multiplicative plus additive Gaussian, then sparse cosmic-ray spikes)
is added last and the result is clamped at zero. Every spectrum draws from
its own PCG64 stream derived from ``(seed, preset, source, level, vessel,
replicate)``, so generation order does not matter.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from ._random import rng_for
from .core import (
    BOTTLE,
    BOTTLE_GRID,
    VIAL,
    VIAL_GRID,
    VESSELS,
    LabeledDataset,
    SampleMeta,
    SpectralGrid,
    Spectrum,
)
from .exceptions import InvalidArgument

LORENTZIAN = "Lorentzian"
GAUSSIAN = "Gaussian"
ETHANOL_REFERENCE_VV = 40.0
PHOTOBLEACH_WAVENUMBER = 1246.0
PHOTOBLEACH_EXPOSURE_S = 900.0
PHOTOBLEACH_LOSS = 0.03
MIN_FLUORESCENCE_WIDTH = 200.0


@dataclass(frozen=True)
class PeakSpec:
    """A single band. ``width`` is the FWHM in cm^-1.

    Bands are tapered with a raised cosine between 2 and 3 FWHM from the
    centre and are exactly zero beyond.
    """

    center: float
    width: float
    amplitude: float
    shape: str = LORENTZIAN

    def __post_init__(self):
        if self.width <= 0:
            raise InvalidArgument("peak width must be positive")
        if self.amplitude < 0:
            raise InvalidArgument("peak amplitude must be non-negative")
        if self.shape not in (LORENTZIAN, GAUSSIAN):
            raise InvalidArgument(f"unknown peak shape {self.shape!r}")

    def evaluate(self, wavenumbers):
        d = np.asarray(wavenumbers, dtype=np.float64) - self.center
        if self.shape == LORENTZIAN:
            y = 1.0 / (1.0 + (2.0 * d / self.width) ** 2)
        else:
            y = np.exp(-4.0 * math.log(2.0) * (d / self.width) ** 2)
        a = np.abs(d) / self.width
        taper = np.where(a <= 2.0, 1.0, 0.5 * (1.0 + np.cos(np.pi * (a - 2.0))))
        taper = np.where(a >= 3.0, 0.0, taper)
        return self.amplitude * y * taper

    def scaled(self, factor):
        return replace(self, amplitude=self.amplitude * factor)

    @classmethod
    def from_dict(cls, d):
        return cls(float(d["center"]), float(d["width"]), float(d["amplitude"]), d.get("shape", LORENTZIAN))


def _sum_peaks(peaks, wavenumbers):
    out = np.zeros(len(wavenumbers))
    for p in peaks:
        out += p.evaluate(wavenumbers)
    return out


DEFAULT_ETHANOL_PEAKS = (
    PeakSpec(884.0, 14.0, 1.00),
    PeakSpec(1046.0, 16.0, 0.38),
    PeakSpec(1086.0, 16.0, 0.45),
    PeakSpec(1276.0, 20.0, 0.16),
    PeakSpec(1454.0, 22.0, 0.52),
)
DEFAULT_METHANOL_PEAK = PeakSpec(1020.0, 18.0, 0.05)


@dataclass(frozen=True)
class BrandProfile:
    brand_id: int
    congener_peaks: tuple
    fluorescence: tuple
    base_ethanol_vv: float
    name: str = ""
    # relative spread of the fluorescence level from one spectrum to the next
    fluorescence_jitter: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "congener_peaks", tuple(self.congener_peaks))
        object.__setattr__(self, "fluorescence", tuple(self.fluorescence))
        if not self.fluorescence:
            raise InvalidArgument("a brand needs at least one fluorescence component")
        for f in self.fluorescence:
            if f.width < MIN_FLUORESCENCE_WIDTH:
                raise InvalidArgument("fluorescence components must be >= 200 cm^-1 wide")
        if self.fluorescence_jitter < 0:
            raise InvalidArgument("fluorescence_jitter must be >= 0")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(
            brand_id=int(d["brand_id"]),
            congener_peaks=[PeakSpec.from_dict(p) for p in d["congener_peaks"]],
            fluorescence=[PeakSpec.from_dict(p) for p in d["fluorescence"]],
            base_ethanol_vv=float(d["base_ethanol_vv"]),
            name=d.get("name", ""),
            fluorescence_jitter=float(d.get("fluorescence_jitter", 0.0)),
        )


@dataclass(frozen=True)
class AcquisitionConfig:
    vessel: str = VIAL
    exposure_s: float = 60.0
    noise_rel: float = 0.004
    shot_noise_scale: float = 0.004
    seed: int = 0
    spike_rate: float = 0.0
    spike_amplitude: float = 0.0

    def __post_init__(self):
        if self.vessel not in VESSELS:
            raise InvalidArgument(f"unknown vessel {self.vessel!r}")
        if min(self.exposure_s, self.noise_rel, self.shot_noise_scale,
               self.spike_rate, self.spike_amplitude) < 0:
            raise InvalidArgument("exposure and noise parameters must be >= 0")

    def noiseless(self):
        return replace(self, noise_rel=0.0, shot_noise_scale=0.0, spike_rate=0.0)


@dataclass(frozen=True)
class GeneratorConfig:
    """Every tunable of the generator. Serialises to a flat JSON document."""

    ethanol_peaks: tuple = DEFAULT_ETHANOL_PEAKS
    methanol_peak: PeakSpec = DEFAULT_METHANOL_PEAK
    class_separation: float = 1.0
    # brand sampling
    ethanol_range: tuple = (40.0, 63.0)
    base_fluorescence: PeakSpec = PeakSpec(1250.0, 1800.0, 1.0, GAUSSIAN)
    n_brand_fluorescence: int = 2
    fluorescence_center_range: tuple = (250.0, 2300.0)
    fluorescence_width_range: tuple = (300.0, 1200.0)
    fluorescence_amplitude: float = 0.6
    n_congeners_range: tuple = (3, 6)
    congener_center_range: tuple = (300.0, 1950.0)
    congener_width_range: tuple = (8.0, 30.0)
    congener_amplitude_range: tuple = (0.02, 0.20)
    # no congener centre within this many methanol FWHMs of the methanol band
    congener_keep_out: float = 4.0
    # per-brand fluorescence jitter, drawn log-uniformly from this range
    fluorescence_jitter_range: tuple = (0.0001, 0.5)
    # sources of the methanol series: closely related whiskies sharing the
    # base fluorescence shape
    methanol_source_separation: float = 0.1
    methanol_source_ethanol_range: tuple = (40.0, 46.0)
    methanol_source_fluorescence: int = 0
    # acquisition
    noise_rel: float = 0.002
    shot_noise_scale: float = 0.005
    # cosmic-ray spikes: Poisson count per spectrum, amplitude in [0.5, 1.5] x this
    spike_rate: float = 0.0
    spike_amplitude: float = 0.0
    exposure_s: float = 60.0
    photobleach_rate: float | None = None
    # vessels
    vial_glass: tuple = (PeakSpec(1100.0, 900.0, 0.05, GAUSSIAN),)
    bottle_glass: tuple = (
        PeakSpec(550.0, 250.0, 1.2, GAUSSIAN),
        PeakSpec(1100.0, 300.0, 0.8, GAUSSIAN),
    )
    bottle_fluorescence: tuple = (PeakSpec(1500.0, 1600.0, 0.6, GAUSSIAN),)
    bottle_attenuation: float = 0.8

    def __post_init__(self):
        for name in ("ethanol_peaks", "vial_glass", "bottle_glass", "bottle_fluorescence"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.class_separation < 0:
            raise InvalidArgument("class_separation must be >= 0")
        if not 0 < self.bottle_attenuation <= 1:
            raise InvalidArgument("bottle_attenuation must be in (0, 1]")

    @property
    def ethanol_reference_amplitude(self):
        return max(p.amplitude for p in self.ethanol_peaks)

    def acquisition(self, vessel=VIAL, seed=0):
        return AcquisitionConfig(vessel, self.exposure_s, self.noise_rel, self.shot_noise_scale, seed,
                                 self.spike_rate, self.spike_amplitude)

    def to_dict(self):
        return json.loads(json.dumps(asdict(self)))

    @classmethod
    def from_dict(cls, d):
        peaks = {"methanol_peak", "base_fluorescence"}
        peak_lists = {"ethanol_peaks", "vial_glass", "bottle_glass", "bottle_fluorescence"}
        kwargs = {}
        for key, value in d.items():
            if key not in cls.__dataclass_fields__:
                raise InvalidArgument(f"unknown generator setting {key!r}")
            if key in peaks:
                value = PeakSpec.from_dict(value)
            elif key in peak_lists:
                value = tuple(PeakSpec.from_dict(p) for p in value)
            elif isinstance(value, list):
                value = tuple(value)
            kwargs[key] = value
        return cls(**kwargs)


DEFAULT_CONFIG = GeneratorConfig()


def reference_profile():
    """Fixed profile used to calibrate the photobleaching rate (a peated malt)."""
    return BrandProfile(
        brand_id=0,
        congener_peaks=(PeakSpec(1600.0, 20.0, 0.08), PeakSpec(1380.0, 18.0, 0.05)),
        fluorescence=(
            DEFAULT_CONFIG.base_fluorescence,
            PeakSpec(1350.0, 800.0, 1.5, GAUSSIAN),
        ),
        base_ethanol_vv=45.8,
        name="reference",
    )


def water_profile(brand_id, config=DEFAULT_CONFIG):
    """40 % v/v ethanol in water: no congeners, a faint instrument background."""
    return BrandProfile(
        brand_id=brand_id,
        congener_peaks=(),
        fluorescence=(config.base_fluorescence.scaled(0.15),),
        base_ethanol_vv=40.0,
        name="40% Ethanol/Water",
    )


@dataclass(frozen=True)
class SpectrumParts:
    """Component-resolved spectrum: ``raman + fluorescence + background``."""

    grid: SpectralGrid
    raman: np.ndarray
    fluorescence: np.ndarray
    background: np.ndarray

    @property
    def total(self):
        return self.raman + self.fluorescence + self.background


def render_parts(profile, ethanol_vv, methanol_vv, grid=VIAL_GRID, config=DEFAULT_CONFIG):
    """Noise-free, vessel-free components of one sample."""
    if not 0 <= ethanol_vv <= 100 or not 0 <= methanol_vv <= 100:
        raise InvalidArgument("concentrations must be within [0, 100] % v/v")
    wn = grid.wavenumbers
    raman = _sum_peaks(config.ethanol_peaks, wn) * (ethanol_vv / ETHANOL_REFERENCE_VV)
    raman += config.methanol_peak.evaluate(wn) * methanol_vv
    raman += _sum_peaks(profile.congener_peaks, wn)
    fluorescence = _sum_peaks(profile.fluorescence, wn)
    return SpectrumParts(grid, raman, fluorescence, np.zeros(grid.n_points))


def calibrate_photobleach_rate(config=DEFAULT_CONFIG):
    """Decay rate (1/s) giving a 3 % intensity loss at 1246 cm^-1 after 900 s.

    Only the fluorescence decays, so the rate is solved against the
    fluorescent fraction of the reference profile measured through a vial.
    """
    ref = reference_profile()
    wn = np.array([PHOTOBLEACH_WAVENUMBER])
    ethanol = _sum_peaks(config.ethanol_peaks, wn) * ref.base_ethanol_vv / ETHANOL_REFERENCE_VV
    raman = ethanol + _sum_peaks(ref.congener_peaks, wn)
    fluo = _sum_peaks(ref.fluorescence, wn)
    glass = _sum_peaks(config.vial_glass, wn)
    total = float(raman[0] + fluo[0] + glass[0])
    fraction = float(fluo[0]) / total
    if fraction <= PHOTOBLEACH_LOSS:
        raise InvalidArgument("reference fluorescence too weak to calibrate photobleaching")
    return -math.log(1.0 - PHOTOBLEACH_LOSS / fraction) / PHOTOBLEACH_EXPOSURE_S


def _bleach_rate(config):
    if config.photobleach_rate is not None:
        return config.photobleach_rate
    return calibrate_photobleach_rate(config)


def apply_photobleach(parts, exposure_s, rate=None, config=DEFAULT_CONFIG):
    """Decay the fluorescence part by ``exp(-rate * exposure_s)``."""
    if exposure_s < 0:
        raise InvalidArgument("exposure must be >= 0")
    if exposure_s == 0:
        return parts
    if rate is None:
        rate = _bleach_rate(config)
    return replace(parts, fluorescence=parts.fluorescence * math.exp(-rate * exposure_s))


def apply_vessel(parts, vessel, config=DEFAULT_CONFIG):
    """Add the container contribution.

    A vial adds a faint glass baseline. A bottle attenuates the sample signal,
    then adds the glass Raman bands and glass fluorescence.
    """
    wn = parts.grid.wavenumbers
    if vessel == VIAL:
        return replace(parts, background=parts.background + _sum_peaks(config.vial_glass, wn))
    if vessel == BOTTLE:
        a = config.bottle_attenuation
        glass = _sum_peaks(config.bottle_glass, wn) + _sum_peaks(config.bottle_fluorescence, wn)
        return SpectrumParts(parts.grid, parts.raman * a, parts.fluorescence * a, parts.background * a + glass)
    raise InvalidArgument(f"unknown vessel {vessel!r}")


def add_noise(values, acq, rng):
    out = np.array(values, dtype=np.float64)
    if acq.noise_rel > 0:
        out = out * (1.0 + acq.noise_rel * rng.standard_normal(len(values)))
    if acq.shot_noise_scale > 0:
        # Gaussian stand-in for shot noise: variance proportional to the signal
        out = out + acq.shot_noise_scale * np.sqrt(np.maximum(values, 0.0)) * rng.standard_normal(len(values))
    if acq.spike_rate > 0 and acq.spike_amplitude > 0:
        n = len(values)
        for _ in range(int(rng.poisson(acq.spike_rate))):
            i = int(rng.integers(n))
            height = acq.spike_amplitude * rng.uniform(0.5, 1.5)
            out[i] += height
            j = i + 1 if i + 1 < n else i - 1
            out[j] += 0.3 * height
    return np.maximum(out, 0.0)


def synth_parts(profile, ethanol_vv, methanol_vv, acq, grid=VIAL_GRID, config=DEFAULT_CONFIG, rate=None):
    parts = render_parts(profile, ethanol_vv, methanol_vv, grid, config)
    parts = apply_photobleach(parts, acq.exposure_s, rate, config)
    return apply_vessel(parts, acq.vessel, config)


def synth_spectrum(profile, ethanol_vv, methanol_vv, acq, grid=VIAL_GRID, config=DEFAULT_CONFIG,
                   meta=None, rng=None, rate=None):
    """One spectrum: render, photobleach, vessel, fluorescence jitter, noise, clamp."""
    parts = synth_parts(profile, ethanol_vv, methanol_vv, acq, grid, config, rate)
    if rng is None:
        rng = rng_for(acq.seed, "spectrum")
    total = parts.total
    if profile.fluorescence_jitter > 0:
        scale = max(0.0, 1.0 + profile.fluorescence_jitter * float(rng.standard_normal()))
        total = total + (scale - 1.0) * parts.fluorescence
    values = add_noise(total, acq, rng)
    if meta is None:
        meta = SampleMeta(
            sample_id=f"b{profile.brand_id:02d}",
            brand_label=profile.brand_id,
            ethanol_vv=ethanol_vv,
            methanol_vv=methanol_vv,
            vessel=acq.vessel,
        )
    return Spectrum(grid, values, meta)


def _draw_profile(rng, brand_id, config):
    lo, hi = config.ethanol_range
    ethanol = float(rng.uniform(lo, hi))
    sep = config.class_separation
    fluor = [config.base_fluorescence]
    for _ in range(config.n_brand_fluorescence):
        fluor.append(PeakSpec(
            float(rng.uniform(*config.fluorescence_center_range)),
            float(rng.uniform(*config.fluorescence_width_range)),
            float(rng.uniform(0.0, 1.0) * config.fluorescence_amplitude * sep),
            GAUSSIAN,
        ))
    n_lo, n_hi = config.n_congeners_range
    n_cong = int(rng.integers(n_lo, n_hi + 1))
    cap = 0.5 * config.ethanol_reference_amplitude
    m = config.methanol_peak
    keep_out = config.congener_keep_out * m.width
    congeners = []
    for _ in range(n_cong):
        amp = float(rng.uniform(*config.congener_amplitude_range)) * sep
        center = float(rng.uniform(*config.congener_center_range))
        while abs(center - m.center) < keep_out:
            center = float(rng.uniform(*config.congener_center_range))
        congeners.append(PeakSpec(
            center,
            float(rng.uniform(*config.congener_width_range)),
            min(amp, cap),
            LORENTZIAN if rng.random() < 0.7 else GAUSSIAN,
        ))
    j_lo, j_hi = config.fluorescence_jitter_range
    jitter = float(np.exp(rng.uniform(np.log(j_lo), np.log(j_hi)))) if j_lo > 0 else 0.0
    return BrandProfile(brand_id, congeners, fluor, ethanol, name=f"Brand {brand_id + 1:02d}",
                        fluorescence_jitter=jitter)


def sample_brand_profiles(n_brands, seed, config=DEFAULT_CONFIG):
    """Draw ``n_brands`` distinct brand profiles, deterministically from ``seed``."""
    if int(n_brands) != n_brands or n_brands <= 0:
        raise InvalidArgument("n_brands must be a positive integer")
    rng = rng_for(seed, "brand-profiles")
    return [_draw_profile(rng, i, config) for i in range(int(n_brands))]


def noiseless_matrix(profiles, grid=VIAL_GRID, config=DEFAULT_CONFIG, vessel=VIAL):
    acq = config.acquisition(vessel).noiseless()
    rate = _bleach_rate(config)
    return np.vstack([
        synth_parts(p, p.base_ethanol_vv, 0.0, acq, grid, config, rate).total for p in profiles
    ])


# --------------------------------------------------------------------------
# Named dataset presets

BRAND_ID = "BrandID"
ETHANOL_REG = "EthanolReg"
METHANOL_TRAIN = "MethanolTrain"
METHANOL_TEST = "MethanolTest"
METHANOL = "Methanol"
THROUGH_BOTTLE = "ThroughBottle"
PRESETS = (BRAND_ID, ETHANOL_REG, METHANOL_TRAIN, METHANOL_TEST, METHANOL, THROUGH_BOTTLE)

METHANOL_TRAIN_LEVELS = tuple(round(0.3 * i, 1) for i in range(11))
METHANOL_TEST_LEVELS = (0.0, 0.3, 1.0, 2.0)

CLI_PRESET_NAMES = {
    "brand-id": BRAND_ID,
    "ethanol": ETHANOL_REG,
    "methanol-train": METHANOL_TRAIN,
    "methanol-test": METHANOL_TEST,
    "methanol": METHANOL,
    "through-bottle": THROUGH_BOTTLE,
}


@dataclass(frozen=True)
class DatasetConfig:
    preset: str = BRAND_ID
    seed: int = 7
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    n_brands: int | None = None
    replicates: int | None = None

    def __post_init__(self):
        if self.preset not in PRESETS:
            raise InvalidArgument(f"unknown preset {self.preset!r}; choose from {PRESETS}")

    def to_dict(self):
        return {
            "preset": self.preset,
            "seed": self.seed,
            "n_brands": self.n_brands,
            "replicates": self.replicates,
            "generator": self.generator.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        gen = GeneratorConfig.from_dict(d.pop("generator", {}))
        preset = CLI_PRESET_NAMES.get(d.get("preset", BRAND_ID), d.get("preset", BRAND_ID))
        return cls(preset=preset, seed=int(d.get("seed", 7)), generator=gen,
                   n_brands=d.get("n_brands"), replicates=d.get("replicates"))


def load_dataset_config(path):
    with open(Path(path), encoding="utf-8") as fh:
        return DatasetConfig.from_dict(json.load(fh))


def _methanol_sources(seed, config):
    rng = rng_for(seed, "methanol-sources")
    source_config = replace(
        config,
        class_separation=config.class_separation * config.methanol_source_separation,
        ethanol_range=config.methanol_source_ethanol_range,
        n_brand_fluorescence=config.methanol_source_fluorescence,
    )
    whiskies = [_draw_profile(rng, i, source_config) for i in range(4)]
    names = ["Source A", "Source B", "40% Ethanol/Water", "Test source C", "Test source D"]
    train = [replace(whiskies[0], brand_id=0, name=names[0]),
             replace(whiskies[1], brand_id=1, name=names[1]),
             replace(water_profile(2, config), name=names[2])]
    test = [replace(whiskies[2], brand_id=3, name=names[3]),
            replace(whiskies[3], brand_id=4, name=names[4])]
    return train, test


def _generate(cfg, preset, grid, jobs, brand_names, attrs):
    """``jobs``: iterable of (profile, label, ethanol, methanol, vessel, level_idx, replicate)."""
    config = cfg.generator
    rate = _bleach_rate(config)
    spectra = []
    for profile, label, ethanol, methanol, vessel, level, rep in jobs:
        acq = config.acquisition(vessel)
        # methanol presets share one stream family so the combined preset
        # reproduces the separate train/test spectra exactly
        family = METHANOL if preset in (METHANOL_TRAIN, METHANOL_TEST) else preset
        rng = rng_for(cfg.seed, family, profile.brand_id, level, vessel, rep)
        meta = SampleMeta(
            sample_id=f"s{profile.brand_id:02d}-{vessel[0]}-c{level:02d}-r{rep:02d}",
            brand_label=label,
            ethanol_vv=ethanol,
            methanol_vv=methanol,
            vessel=vessel,
            replicate=rep,
        )
        spectra.append(synth_spectrum(profile, ethanol, methanol, acq, grid, config, meta, rng, rate))
    attrs = {"preset": preset, "seed": cfg.seed, "config": cfg.to_dict(), **attrs}
    return LabeledDataset(grid, spectra, brand_names, attrs)


def synth_paper_shaped_dataset(config=None, **overrides):
    """Generate one of the named dataset presets.

    ``BrandID``: 28 brands x 40 replicates through vials.
    ``EthanolReg``: the same 28 brands plus a 40 % ethanol/water reference.
    ``MethanolTrain``: 2 whiskies + ethanol/water spiked 0-3 % in 0.3 % steps, 40 replicates.
    ``MethanolTest``: 2 unseen whiskies at 0, 0.3, 1, 2 %, 20 replicates.
    ``Methanol``: train and test sources together; test sources listed in
    ``attrs["holdout_sources"]``.
    ``ThroughBottle``: 7 brands x 30 replicates through vial and bottle.
    """
    if config is None:
        config = DatasetConfig(**overrides)
    elif overrides:
        config = replace(config, **overrides)
    preset, gen = config.preset, config.generator

    if preset in (BRAND_ID, ETHANOL_REG):
        n = config.n_brands or 28
        reps = config.replicates or 40
        profiles = sample_brand_profiles(n, config.seed, gen)
        if preset == ETHANOL_REG:
            profiles.append(water_profile(n, gen))
        jobs = [(p, p.brand_id, p.base_ethanol_vv, 0.0, VIAL, 0, r) for p in profiles for r in range(reps)]
        return _generate(config, preset, VIAL_GRID, jobs, [p.name for p in profiles], {})

    if preset == THROUGH_BOTTLE:
        n = config.n_brands or 7
        reps = config.replicates or 30
        profiles = sample_brand_profiles(n, config.seed, gen)
        jobs = [(p, p.brand_id, p.base_ethanol_vv, 0.0, v, 0, r)
                for v in (VIAL, BOTTLE) for p in profiles for r in range(reps)]
        return _generate(config, preset, BOTTLE_GRID, jobs, [p.name for p in profiles], {})

    train, test = _methanol_sources(config.seed, gen)
    if preset == METHANOL_TRAIN:
        sources, levels, reps, names = train, METHANOL_TRAIN_LEVELS, config.replicates or 40, train
    elif preset == METHANOL_TEST:
        sources, levels, reps, names = test, METHANOL_TEST_LEVELS, config.replicates or 20, test
    else:
        sources, names = train + test, train + test
        levels, reps = None, None
    label_of = {p.brand_id: i for i, p in enumerate(names)}
    jobs = []
    for p in sources:
        if preset == METHANOL:
            held_out = p.brand_id >= 3
            lv = METHANOL_TEST_LEVELS if held_out else METHANOL_TRAIN_LEVELS
            rp = config.replicates or (20 if held_out else 40)
        else:
            lv, rp = levels, reps
        for li, level in enumerate(lv):
            for r in range(rp):
                jobs.append((p, label_of[p.brand_id], p.base_ethanol_vv, level, VIAL, li, r))
    attrs = {}
    if preset == METHANOL:
        attrs["holdout_sources"] = [label_of[p.brand_id] for p in test]
    return _generate(config, preset, VIAL_GRID, jobs, [p.name for p in names], attrs)
