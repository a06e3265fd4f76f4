"""Counting-function statistics for Gaussian and Wigner random matrices.

Exact determinantal laws for the GUE, interlacing samplers for GUE/GSE,
Marchenko-Pastur and semicircle classical locations, and moderate-deviation
diagnostics checked against exact and Monte Carlo oracles.
"""
__version__ = "0.1.0"

from .laws import (
    MarchenkoPasturLaw,
    classical_location,
    mp_cdf,
    mp_density,
    mp_quantile,
    semicircle_cdf,
    semicircle_density,
    semicircle_quantile,
)
from .spectral import Interval, Spectrum, counting, duality_check, eigenvalues
from .ensembles import (
    AtomDistribution,
    EnsembleSpec,
    interlace_even,
    make_matched_atom,
    sample_gse_spectrum,
    sample_gue_spectrum_via_interlacing,
    sample_matrix,
)
from .dpp import (
    BinomialLaw,
    KernelRestriction,
    PoissonBinomial,
    counting_law_gue,
    exact_cgf,
    exact_upper_rate,
    gue_kernel,
    oscillator_wavefunctions,
    poisson_binomial,
    restrict_kernel,
)
from .mdpstats import (
    MdpScaling,
    RateCurve,
    bulk_eigenvalue_statistic,
    covariance_eigenvalue_statistic,
    moment_match_report,
    numerics_counting,
    rate_curve_exact,
    rate_curve_mc,
    standardized_counting,
    variance_scan,
)

__all__ = [
    "__version__",
    "AtomDistribution",
    "BinomialLaw",
    "bulk_eigenvalue_statistic",
    "classical_location",
    "counting",
    "counting_law_gue",
    "covariance_eigenvalue_statistic",
    "duality_check",
    "eigenvalues",
    "EnsembleSpec",
    "exact_cgf",
    "exact_upper_rate",
    "gue_kernel",
    "interlace_even",
    "Interval",
    "KernelRestriction",
    "make_matched_atom",
    "MarchenkoPasturLaw",
    "MdpScaling",
    "moment_match_report",
    "mp_cdf",
    "mp_density",
    "mp_quantile",
    "numerics_counting",
    "oscillator_wavefunctions",
    "poisson_binomial",
    "PoissonBinomial",
    "rate_curve_exact",
    "rate_curve_mc",
    "RateCurve",
    "restrict_kernel",
    "sample_gse_spectrum",
    "sample_gue_spectrum_via_interlacing",
    "sample_matrix",
    "semicircle_cdf",
    "semicircle_density",
    "semicircle_quantile",
    "Spectrum",
    "standardized_counting",
    "variance_scan",
]
