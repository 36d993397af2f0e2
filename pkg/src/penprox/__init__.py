"""Sparse regression with jointly optimized per-coefficient penalty weights.

Coefficients and their l1 penalty weights are treated as one decision
vector and minimized by proximal gradient methods built on closed-form
proximal operators for the two-variable penalty lam*|beta|, with or
without a logarithmic barrier on lam.  Structured sparsity (groups,
overlapping groups) enters through smooth priors on the weights, so one
proximal operator serves every structure.
"""

from .design import (
    Dataset,
    DesignSpec,
    ExpansionMap,
    expand_second_order,
    hierarchical_groups,
    load_csv,
    second_order_map,
    standardize_columns,
)
from .errors import ConfigError, DataError, DivergedError, NumericalError, PenproxError
from .likelihoods import (
    FAMILIES,
    LikelihoodFamily,
    LinearModelData,
    finite_diff_check,
    grad_nll,
    grad_nll_logaux,
    nll,
)
from .objective import (
    PenaltyConfig,
    ProfiledPenalty,
    exponential_rho,
    half_cauchy_rho,
    joint_objective,
    lambda_a,
    lambda_star,
    penalty_value_grad,
    threshold_map,
)
from .optimizer import (
    FitResult,
    OptimizerConfig,
    ParamState,
    descent_check,
    estimate_smooth_lipschitz,
    fit,
    fit_bcd_reweighted,
    fit_lasso,
    fit_svrg,
)
from .path import PathConfig, PathResult, default_tau_grid, rolling_median, run_path
from .priors import (
    GroupStructure,
    PriorSpec,
    finite_diff_check_prior,
    grad_log_prior,
    log_prior,
    read_group_file,
    smooth_min,
    write_group_file,
)
from .prox import ProxResult, prox_cost, prox_vp, prox_vp_log, reduced_prox, sto
from .simulate import SynthSpec, generate

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DataError",
    "Dataset",
    "DesignSpec",
    "DivergedError",
    "ExpansionMap",
    "FAMILIES",
    "FitResult",
    "GroupStructure",
    "LikelihoodFamily",
    "LinearModelData",
    "NumericalError",
    "OptimizerConfig",
    "ParamState",
    "PathConfig",
    "PathResult",
    "PenaltyConfig",
    "PenproxError",
    "PriorSpec",
    "ProfiledPenalty",
    "ProxResult",
    "SynthSpec",
    "default_tau_grid",
    "descent_check",
    "estimate_smooth_lipschitz",
    "expand_second_order",
    "exponential_rho",
    "finite_diff_check",
    "finite_diff_check_prior",
    "fit",
    "fit_bcd_reweighted",
    "fit_lasso",
    "fit_svrg",
    "generate",
    "grad_log_prior",
    "grad_nll",
    "grad_nll_logaux",
    "half_cauchy_rho",
    "hierarchical_groups",
    "joint_objective",
    "lambda_a",
    "lambda_star",
    "load_csv",
    "log_prior",
    "nll",
    "penalty_value_grad",
    "prox_cost",
    "prox_vp",
    "prox_vp_log",
    "read_group_file",
    "reduced_prox",
    "rolling_median",
    "run_path",
    "second_order_map",
    "smooth_min",
    "standardize_columns",
    "sto",
    "threshold_map",
    "write_group_file",
]
