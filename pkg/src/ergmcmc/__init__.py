"""Bayesian inference for exponential random graph models.

Posterior sampling uses a population exchange-algorithm MCMC whose
acceptance ratios cancel the intractable normalising constant, with
optional two-stage delayed rejection and three adaptive proposal schemes.
"""

from .adaptcov import RunningCovariance, batch_covariance, scale_proposal
from .datasets import load_builtin, load_dataset
from .diagnostics import RunReport, SampleStore, autocorrelation, ess, performance, summarize
from .graph import Graph, read_attributes, read_edge_list
from .model import (
    ExactTable,
    GaussianPrior,
    ModelSpec,
    exact_log_z,
    exact_sample,
    log_prior_density,
    log_unnorm_likelihood,
    simulate_auxiliary,
    stat_vector,
)
from .samplers import (
    PopulationState,
    SamplerConfig,
    adaptive_propose,
    ads_propose,
    aea_accept_stage1,
    aea_accept_stage2,
    antithetic_second,
    run,
)
from .statistics import (
    Edges,
    Gwd,
    Gwesp,
    KStar,
    NodeFactor,
    change_score,
    evaluate,
    format_statistic,
    parse_statistic,
)

__version__ = "0.1.0"

__all__ = [
    "Graph", "read_edge_list", "read_attributes",
    "Edges", "KStar", "Gwesp", "Gwd", "NodeFactor",
    "evaluate", "change_score", "parse_statistic", "format_statistic",
    "ModelSpec", "GaussianPrior", "stat_vector",
    "log_unnorm_likelihood", "log_prior_density",
    "simulate_auxiliary", "exact_sample", "exact_log_z", "ExactTable",
    "RunningCovariance", "batch_covariance", "scale_proposal",
    "SampleStore", "RunReport", "autocorrelation", "ess", "performance", "summarize",
    "SamplerConfig", "PopulationState", "run",
    "ads_propose", "adaptive_propose", "antithetic_second",
    "aea_accept_stage1", "aea_accept_stage2",
    "load_builtin", "load_dataset",
    "__version__",
]
