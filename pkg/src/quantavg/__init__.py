"""Semiparametric model averaging for conditional quantile prediction."""

from .data import Dataset, random_split
from .errors import ConfigError, DataError, NumericalError, QuantAvgError
from .kernels import (BandwidthPlan, bandwidth_plan, epanechnikov,
                      pilot_bandwidth, quantile_bandwidth,
                      rule_of_thumb_bandwidth)
from .penalties import ScadPenalty, check_loss, scad_derivative, scad_value
from .smoothing import (MarginalModel, build_marginal_models,
                        evaluate_marginal, evaluate_marginal_many,
                        fit_local_linear_mean, fit_local_linear_quantile)
from .solver import (MsicSelection, SolverReport, WeightVector,
                     lambda_grid_least_squares, lambda_grid_quantile,
                     quantile_objective, select_lambda_cv_least_squares,
                     select_lambda_msic, solve_least_squares,
                     solve_penalized_least_squares, solve_penalized_quantile,
                     tau_quantile, weighted_univariate_quantile_min)

__all__ = [
    "Dataset", "random_split",
    "ConfigError", "DataError", "NumericalError", "QuantAvgError",
    "BandwidthPlan", "bandwidth_plan", "epanechnikov", "pilot_bandwidth",
    "quantile_bandwidth", "rule_of_thumb_bandwidth",
    "ScadPenalty", "check_loss", "scad_derivative", "scad_value",
    "MarginalModel", "build_marginal_models", "evaluate_marginal",
    "evaluate_marginal_many", "fit_local_linear_mean",
    "fit_local_linear_quantile",
    "MsicSelection", "SolverReport", "WeightVector",
    "lambda_grid_least_squares", "lambda_grid_quantile", "quantile_objective",
    "select_lambda_cv_least_squares", "select_lambda_msic",
    "solve_least_squares", "solve_penalized_least_squares",
    "solve_penalized_quantile", "tau_quantile",
    "weighted_univariate_quantile_min",
]

__version__ = "0.1.0"
