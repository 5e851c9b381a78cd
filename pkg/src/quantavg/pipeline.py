"""Two-step model-averaging pipeline: smooth marginals, then weight them.

Step one fits a one-dimensional marginal regression per covariate; step two
regresses the response on the fitted marginals (with or without a sparsity
penalty) to produce the averaging weights. Prediction at a new point is the
affine combination w0 + sum_j w_j * mhat_j(x_j), skipping zero-weight
marginals.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset
from .errors import ConfigError, QuantAvgError
from .kernels import bandwidth_plan
from .penalties import ScadPenalty, check_loss
from .rng import derive_rng
from .smoothing import (MEAN, QUANTILE, MarginalModel, build_marginal_models,
                        evaluate_marginal_many)
from .solver import (MsicSelection, SolverReport, WeightVector,
                     lambda_grid_least_squares, lambda_grid_quantile,
                     select_lambda_cv_least_squares, select_lambda_msic,
                     solve_least_squares, solve_penalized_quantile)

QUANTILE_METHODS = ("SMAQP", "PSMAQP")
MEAN_METHODS = ("SMAMP", "PSMAMP")
METHODS = QUANTILE_METHODS + MEAN_METHODS


@dataclass(frozen=True)
class FitConfig:
    """Everything the two-step fit needs besides the data.

    Mean-prediction methods ignore tau when fitting (they smooth and weight
    under squared error) but tau still defines the check loss used for
    evaluation.
    """

    tau: float = 0.5
    method: str = "PSMAQP"
    c_n_rule: str = "log_p"  # "log_p" | "one"
    bandwidth_overrides: tuple[tuple[int, float], ...] | None = None
    marginal_taus: tuple[float, ...] | None = None
    scad_a: float = 3.7
    solver_tol: float = 1e-6
    max_sweeps: int = 200
    grid_size: int = 50
    grid_ratio: float = 1e-3
    pilot_rule: str = "rot"  # "rot" | "normal_reference"
    eval_mode: str = "refit"
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.tau < 1.0:
            raise ConfigError(f"tau must lie in (0, 1), got {self.tau}")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if self.c_n_rule not in ("log_p", "one"):
            raise ConfigError(f"unknown c_n_rule {self.c_n_rule!r}")
        if self.scad_a <= 2.0:
            raise ConfigError("scad_a must exceed 2")
        if self.grid_size < 1:
            raise ConfigError("grid_size must be at least 1")
        if self.pilot_rule not in ("rot", "normal_reference"):
            raise ConfigError(f"unknown pilot_rule {self.pilot_rule!r}")
        if self.eval_mode not in ("refit", "interpolate"):
            raise ConfigError(f"unknown eval_mode {self.eval_mode!r}")
        if self.max_sweeps < 1:
            raise ConfigError("max_sweeps must be at least 1")

    def c_n(self, p: int) -> float:
        return float(np.log(p)) if self.c_n_rule == "log_p" else 1.0


@dataclass(frozen=True)
class AveragingModel:
    config: FitConfig
    marginals: tuple[MarginalModel, ...]
    weights: WeightVector
    selection: MsicSelection | None = None
    report: SolverReport | None = None
    cv_lambda: float | None = None

    @property
    def p(self) -> int:
        return len(self.marginals)


@dataclass(frozen=True)
class PredictionReport:
    predictions: np.ndarray
    mpe: float
    n_eval: int


def _marginal_stage(train: Dataset, config: FitConfig, loss: str):
    overrides = dict(config.bandwidth_overrides) if config.bandwidth_overrides else None
    quantile = loss == QUANTILE
    plan = bandwidth_plan(train.X, config.tau, y=train.y,
                          pilot=config.pilot_rule, robust=quantile,
                          quantile_pilot=quantile, overrides=overrides)
    taus = config.marginal_taus if config.marginal_taus is not None else config.tau
    return build_marginal_models(train, taus, plan, loss)


def _weights_for(method: str, design, y, config: FitConfig):
    selection = None
    report = None
    cv_lambda = None
    if method == "SMAQP":
        weights, report = solve_penalized_quantile(
            design, y, config.tau, ScadPenalty(0.0, config.scad_a),
            tol=config.solver_tol, max_sweeps=config.max_sweeps)
    elif method == "PSMAQP":
        grid = lambda_grid_quantile(design, y, config.tau,
                                    size=config.grid_size,
                                    ratio=config.grid_ratio)
        selection = select_lambda_msic(design, y, config.tau, grid,
                                       config.c_n(design.shape[1]),
                                       a=config.scad_a, tol=config.solver_tol,
                                       max_sweeps=config.max_sweeps)
        weights = selection.chosen_weights
        report = selection.chosen_report
    elif method == "SMAMP":
        weights = solve_least_squares(design, y)
    elif method == "PSMAMP":
        grid = lambda_grid_least_squares(design, y, size=config.grid_size,
                                         ratio=config.grid_ratio)
        cv_lambda, weights, _ = select_lambda_cv_least_squares(
            design, y, grid, a=config.scad_a, seed=config.seed)
    else:
        raise ConfigError(f"unknown method {method!r}")
    return weights, selection, report, cv_lambda


def fit_many(train: Dataset, config: FitConfig,
             methods) -> dict[str, AveragingModel]:
    """Fit several methods on one training set, sharing the marginal stage.

    Quantile and mean methods need different marginal fits; within each
    group the smoothing stage is computed once.
    """
    if train.n < 50:
        raise ValueError(f"need at least 50 training rows, got {train.n}")
    if train.p < 1:
        raise ValueError("need at least one predictor")
    methods = tuple(methods)
    for m in methods:
        if m not in METHODS:
            raise ConfigError(f"unknown method {m!r}")
    stage = {}
    out = {}
    for method in methods:
        loss = QUANTILE if method in QUANTILE_METHODS else MEAN
        if loss not in stage:
            stage[loss] = _marginal_stage(train, config, loss)
        models, design = stage[loss]
        weights, selection, report, cv_lambda = _weights_for(
            method, design, train.y, config)
        cfg = replace(config, method=method)
        if config.eval_mode != "refit":
            models = [replace(m, eval_mode=config.eval_mode) for m in models]
        out[method] = AveragingModel(
            config=cfg,
            marginals=tuple(models),
            weights=weights,
            selection=selection,
            report=report,
            cv_lambda=cv_lambda,
        )
    return out


def fit(train: Dataset, config: FitConfig) -> AveragingModel:
    """Two-step fit of a single method; see fit_many."""
    return fit_many(train, config, (config.method,))[config.method]


def predict(model: AveragingModel, X_new) -> np.ndarray:
    """w0 + sum over nonzero-weight marginals of w_j * mhat_j(x_j)."""
    X_new = np.asarray(X_new, dtype=float)
    if X_new.ndim != 2 or X_new.shape[1] != model.p:
        raise ValueError(f"expected a matrix with {model.p} columns")
    finite = np.all(np.isfinite(X_new), axis=1)
    if not np.all(finite):
        raise ValueError(f"non-finite input at row {int(np.argmin(finite))}")
    yhat = np.full(X_new.shape[0], model.weights.w0)
    for j in model.weights.support:
        yhat += model.weights.w[j] * evaluate_marginal_many(
            model.marginals[j], X_new[:, j])
    return yhat


def evaluate_mpe(y, yhat, tau: float) -> float:
    """Mean check loss; at tau = 0.5 this is half the mean absolute error."""
    y = np.asarray(y, dtype=float)
    yhat = np.asarray(yhat, dtype=float)
    if y.size == 0:
        raise ValueError("empty evaluation set")
    if y.shape != yhat.shape:
        raise ValueError("length mismatch between y and yhat")
    return float(np.mean(check_loss(y - yhat, tau)))


def prediction_report(model: AveragingModel, data: Dataset) -> PredictionReport:
    preds = predict(model, data.X)
    return PredictionReport(predictions=preds,
                            mpe=evaluate_mpe(data.y, preds, model.config.tau),
                            n_eval=data.n)


@dataclass(frozen=True)
class BootstrapSE:
    se: np.ndarray          # p+1 standard deviations: intercept first
    failures: int
    draws: int


def bootstrap_weight_se(train: Dataset, config: FitConfig, B: int,
                        seed: int) -> BootstrapSE:
    """Nonparametric bootstrap standard errors for (w0, w).

    Each resample refits the whole pipeline (marginals included). A failed
    resample is retried once with a fresh draw, then skipped; the skip
    count is reported, never imputed.
    """
    if B < 100:
        raise ValueError("need at least 100 bootstrap draws")
    coefs = []
    failures = 0
    for b in range(B):
        for attempt in (0, 1):
            rng = derive_rng(seed, "bootstrap", b, attempt)
            idx = rng.integers(0, train.n, train.n)
            try:
                m = fit(train.take(idx), config)
            except (QuantAvgError, ValueError):
                continue
            coefs.append(np.concatenate([[m.weights.w0], m.weights.w]))
            break
        else:
            failures += 1
    if len(coefs) < 2:
        raise QuantAvgError("all bootstrap refits failed")
    se = np.std(np.asarray(coefs), axis=0, ddof=1)
    return BootstrapSE(se=se, failures=failures, draws=B)


# ---------------------------------------------------------------------------
# model persistence: a versioned JSON dump carrying the weights and each
# marginal's knots/levels/slopes, enough to predict without the training
# data (loaded models evaluate marginals by interpolating the knot fits)

MODEL_FORMAT = "quantavg-model"
MODEL_VERSION = 1


def save_model(model: AveragingModel, path) -> None:
    payload = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "method": model.config.method,
        "tau": model.config.tau,
        "w0": model.weights.w0,
        "w": model.weights.w.tolist(),
        "chosen_lambda": (model.selection.chosen_lambda
                          if model.selection else model.cv_lambda),
        "marginals": [
            {
                "covariate_index": m.covariate_index,
                "tau": m.tau,
                "bandwidth": m.bandwidth,
                "loss": m.loss,
                "support": list(m.support),
                "knots": m.knots.tolist(),
                "fitted_levels": m.fitted_levels.tolist(),
                "fitted_slopes": m.fitted_slopes.tolist(),
            }
            for m in model.marginals
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_model(path) -> AveragingModel:
    from .errors import DataError
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read model file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid model JSON: {exc}") from exc
    if payload.get("format") != MODEL_FORMAT:
        raise ValueError(f"{path}: not a {MODEL_FORMAT} file")
    if payload.get("version") != MODEL_VERSION:
        raise ValueError(f"{path}: unsupported version {payload.get('version')}")
    marginals = tuple(
        MarginalModel(
            covariate_index=m["covariate_index"],
            tau=m["tau"],
            bandwidth=m["bandwidth"],
            knots=np.asarray(m["knots"]),
            fitted_levels=np.asarray(m["fitted_levels"]),
            fitted_slopes=np.asarray(m["fitted_slopes"]),
            support=tuple(m["support"]),
            loss=m["loss"],
            y_sorted=None,
            eval_mode="interpolate",
        )
        for m in payload["marginals"]
    )
    config = FitConfig(tau=payload["tau"], method=payload["method"],
                       eval_mode="interpolate")
    return AveragingModel(
        config=config,
        marginals=marginals,
        weights=WeightVector(payload["w0"], np.asarray(payload["w"])),
    )
