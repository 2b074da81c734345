"""Correlated Nakagami-m fading and Gaussian-copula outage analysis for
fluid antenna systems.

The package generates fully correlated channel envelope ensembles, builds
the competing copula covariance candidates (coefficient-level versus
envelope-level spatial correlation), evaluates the peak-envelope CDF
through a multivariate normal integrator, and compares the resulting
outage probabilities against Monte Carlo benchmarks.
"""

from .chan_gen import (
    ChannelEnsemble,
    GeneratorConfig,
    derive_seed,
    generate_copula,
    generate_physical,
    read_ensemble_csv,
    write_ensemble_csv,
)
from .copula import CdfResult, MvnSpec, mvn_cdf, peak_cdf, peak_pdf
from .correlation import (
    CorrelationMatrix,
    FasGeometry,
    empirical_pearson,
    envelope_correlation,
    gain_correlation,
    jakes_matrix,
    normal_scores_correlation,
)
from .nakagami import NakagamiParams, cdf, pdf, quantile
from .numerics import psd_repair, sym_eigen
from .outage import (
    OutageCurve,
    OutageQuery,
    copula_covariance,
    monte_carlo_curves,
    op_monte_carlo,
    op_monte_carlo_paired,
    op_tas,
    op_theory,
    tas_theory_curve,
    theory_curve,
    write_curve_csv,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ChannelEnsemble",
    "GeneratorConfig",
    "derive_seed",
    "generate_copula",
    "generate_physical",
    "read_ensemble_csv",
    "write_ensemble_csv",
    "CdfResult",
    "MvnSpec",
    "mvn_cdf",
    "peak_cdf",
    "peak_pdf",
    "CorrelationMatrix",
    "FasGeometry",
    "empirical_pearson",
    "envelope_correlation",
    "gain_correlation",
    "jakes_matrix",
    "normal_scores_correlation",
    "NakagamiParams",
    "cdf",
    "pdf",
    "quantile",
    "psd_repair",
    "sym_eigen",
    "OutageCurve",
    "OutageQuery",
    "copula_covariance",
    "monte_carlo_curves",
    "op_monte_carlo",
    "op_monte_carlo_paired",
    "op_tas",
    "op_theory",
    "tas_theory_curve",
    "theory_curve",
    "write_curve_csv",
]
