"""Rank-based test of the bivariate extreme value condition."""

from .estimators import (
    AtomMeasure,
    SpectralCdf,
    box_mass,
    exponent_measure,
    spectral_cdf,
    stdf_rank,
    stdf_spectral,
    strip_mass,
)
from .sample import (
    BivariateSample,
    ConfigError,
    RankData,
    SampleFormatError,
    TestConfig,
    compute_ranks,
    load_sample,
)
from .statistic import QuadSpec, ScanCurve, k_scan, test_statistic

__version__ = "0.1.0"
