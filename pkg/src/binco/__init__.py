"""Sparse partial-correlation network inference with direct FDR control.

Aggregates L1-regularized estimates over resamples, models per-edge
selection frequencies as a two-component mixture with a powered-beta-
binomial null, and selects the frequency cutoff and regularization level
that maximize the estimated true-edge count at a target FDR.
"""

from .data import DataMatrix, standardize
from .driver import (
    RunConfig,
    StudyConfig,
    emit_report,
    run_binco,
    run_simulation_study,
    two_step_l,
)
from .estimator import BincoNetwork
from .exceptions import BincoError
from .freqmodel import (
    NO_SIGNAL,
    EmpiricalDensity,
    NetworkEstimate,
    NullMixtureFit,
    PoweredBetaParams,
    empirical_density,
    estimate_fdr,
    estimate_true_edges,
    fit_null,
    optimal_cutoff,
    powered_beta_binomial_pmf,
    select_lambda,
)
from .resample import (
    BOOTSTRAP,
    SUBSAMPLE_HALF,
    FrequencyTable,
    ResamplePlan,
    frequency_grid,
    selection_frequencies,
)
from .simgen import (
    EMPIRICAL,
    EMPTY,
    HUB,
    POWER_LAW,
    GroundTruthModel,
    evaluate,
    gen_precision,
    gen_topology,
    ideal_power,
    sample_mvn,
)
from .space import (
    SpaceEstimate,
    fit_neighborhood,
    fit_space,
    lambda_max,
    sample_weights,
    selected_edges,
)
from .stability import StabilityResult, fdr_proxy_bound, stability_select
from .ushape import UShapeReport, detect_ushape, smooth_density

__version__ = "0.1.0"

__all__ = [
    "BincoError",
    "BincoNetwork",
    "BOOTSTRAP",
    "DataMatrix",
    "EMPIRICAL",
    "EMPTY",
    "EmpiricalDensity",
    "FrequencyTable",
    "GroundTruthModel",
    "HUB",
    "NO_SIGNAL",
    "NetworkEstimate",
    "NullMixtureFit",
    "POWER_LAW",
    "PoweredBetaParams",
    "ResamplePlan",
    "RunConfig",
    "SUBSAMPLE_HALF",
    "SpaceEstimate",
    "StabilityResult",
    "StudyConfig",
    "UShapeReport",
    "detect_ushape",
    "emit_report",
    "empirical_density",
    "estimate_fdr",
    "estimate_true_edges",
    "evaluate",
    "fdr_proxy_bound",
    "fit_neighborhood",
    "fit_null",
    "fit_space",
    "frequency_grid",
    "gen_precision",
    "gen_topology",
    "ideal_power",
    "lambda_max",
    "optimal_cutoff",
    "powered_beta_binomial_pmf",
    "run_binco",
    "run_simulation_study",
    "sample_mvn",
    "sample_weights",
    "select_lambda",
    "selected_edges",
    "selection_frequencies",
    "smooth_density",
    "stability_select",
    "standardize",
    "two_step_l",
]
