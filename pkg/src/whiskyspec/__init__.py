"""Raman-spectroscopy chemometrics on synthetic whisky spectra.

Subpackages and modules:

- ``core``: spectral grid, labelled datasets and their CSV/JSON files
- ``synthgen``: the synthetic spectrum generator and dataset presets
- ``preprocess``: scaling, polynomial baseline removal, PCA
- ``classifiers``: the classical brand classifiers
- ``regression``: PCR, PLSR and ridge calibration with detection limits
- ``neural``: the FCN / CNN / hybrid parallel networks
- ``harness``: splits, metrics tables and experiment grids
- ``serialization``: versioned model JSON
- ``cli``: the ``whiskyspec`` command
"""
__version__ = "0.1.0"
