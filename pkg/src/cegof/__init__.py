"""Copula goodness-of-fit testing with copula entropy."""

from .copulas import (
    FitResult,
    GaussianCopula,
    GaussianCopulaParams,
    GumbelCopula,
    GumbelCopulaParams,
    apply_margins,
    fit_gaussian,
    fit_gumbel,
    gaussian_log_density,
    gumbel_log_density,
    hypothesis_ce,
    kendall_tau,
    sample_gaussian_copula,
    sample_gumbel_copula,
)
from .entropy import EntropyConfig, knn_entropy, true_ce
from .exceptions import (
    BootstrapError,
    CegofError,
    ConfigError,
    DomainError,
    EstimationError,
    InputError,
    ParameterError,
)
from .gof import (
    CopulaEntropyTest,
    FamilyFailure,
    TestReport,
    bootstrap_p_value,
    compare_families,
    test_statistic,
)
from .ranks import RankTransformer, to_pseudo_obs
from .simulation import ExperimentGrid, run_experiment, summarize
from .special import RngStream, digamma, inv_norm_cdf, norm_cdf, sample_positive_stable

__version__ = "0.1.0"
