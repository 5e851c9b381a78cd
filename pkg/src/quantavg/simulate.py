"""Synthetic data generators, selection metrics and the Monte Carlo runner.

Three data-generating processes are provided: two sparse additive signals
(independent and common-factor-correlated uniform covariates) and one
specified directly through its conditional quantile function, generated
comonotonically so every conditional quantile is known exactly.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .data import Dataset
from .errors import QuantAvgError
from .pipeline import (MEAN_METHODS, METHODS, FitConfig, evaluate_mpe,
                       fit_many, predict)
from .rng import derive_rng, derive_seed
from .solver import WeightVector

ERROR_LAWS = ("SN", "T3", "MN")


@dataclass(frozen=True)
class SimulationSpec:
    """One Monte Carlo cell: DGP, sizes, error law, level, seed."""

    example: int
    n_tr: int
    n_te: int = 100
    error: str = "SN"
    tau: float = 0.5
    replications: int = 500
    seed: int = 0
    t_mix: float = 1.0  # common-factor strength for example 2

    def __post_init__(self):
        if self.example not in (1, 2, 3):
            raise ValueError(f"example must be 1, 2 or 3, got {self.example}")
        if self.error not in ERROR_LAWS:
            raise ValueError(f"unknown error law {self.error!r}")
        if not 0.0 < self.tau < 1.0:
            raise ValueError("tau must lie in (0, 1)")
        if self.replications < 1:
            raise ValueError("need at least one replication")
        if self.n_tr < 50 or self.n_te < 1:
            raise ValueError("bad sample sizes")

    @property
    def p(self) -> int:
        """Covariate count rule: floor(sqrt(n_tr))."""
        return int(math.isqrt(self.n_tr))


def true_support(example: int, p: int) -> tuple[int, ...]:
    """0-based indices of the covariates with nonzero optimal weights."""
    s = 4 if example in (1, 2) else 5
    if p < s:
        raise ValueError(f"example {example} needs p >= {s}")
    return tuple(range(s))


def sample_error(law: str, n: int, seed: int) -> np.ndarray:
    """Draw n errors: standard normal, t(3), or the 0.95/0.05 normal
    mixture with sd 1 and 10."""
    rng = derive_rng(seed, f"error-{law}")
    if law == "SN":
        return rng.standard_normal(n)
    if law == "T3":
        return rng.standard_t(3, n)
    if law == "MN":
        z = rng.standard_normal(n)
        wide = rng.random(n) < 0.05
        return np.where(wide, 10.0 * z, z)
    raise ValueError(f"unknown error law {law!r}")


def _ex1_components(X):
    return (-np.sin(2.0 * X[:, 0])
            + X[:, 1] ** 2 - 25.0 / 12.0
            + X[:, 2]
            + np.exp(-X[:, 3]) - 0.4 * math.sinh(2.5))


def generate_example1(n: int, p: int, error: str, seed: int) -> Dataset:
    """Additive signal in the first four of p independent U(-2.5, 2.5)
    covariates, plus noise."""
    if p < 4:
        raise ValueError("example 1 needs p >= 4")
    X = derive_rng(seed, "ex1-covariates").uniform(-2.5, 2.5, (n, p))
    y = _ex1_components(X) + sample_error(error, n, seed)
    return Dataset(X, y)


def _ex2_components(X):
    s3 = np.sin(2.0 * np.pi * X[:, 2])
    s4 = np.sin(2.0 * np.pi * X[:, 3])
    c4 = np.cos(2.0 * np.pi * X[:, 3])
    m1 = 2.0 * X[:, 0]
    m2 = (2.0 * X[:, 1] - 1.0) ** 2
    m3 = s3 / (2.0 - s3)
    m4 = 0.1 * s4 + 0.2 * c4 + 0.3 * s4 ** 2 + 0.4 * c4 ** 3 + 0.5 * s4 ** 3
    return 3.0 * m1 + 3.0 * m2 + 2.0 * m3 + 2.0 * m4


def generate_example2(n: int, p: int, error: str, t: float, seed: int) -> Dataset:
    """Like example 1 but covariates share a common uniform factor:
    X_ij = (W_ij + t*U_i)/(1 + t), so columns are correlated for t > 0."""
    if p < 4:
        raise ValueError("example 2 needs p >= 4")
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    rng = derive_rng(seed, "ex2-covariates")
    W = rng.uniform(0.0, 1.0, (n, p))
    U = rng.uniform(0.0, 1.0, n)
    X = (W + t * U[:, None]) / (1.0 + t)
    y = _ex2_components(X) + math.sqrt(1.74) * sample_error(error, n, seed)
    return Dataset(X, y)


def example3_quantile(X, tau: float) -> np.ndarray:
    """The exact conditional tau-quantile of the example-3 response."""
    X = np.asarray(X, dtype=float)
    z = ndtri(tau)
    return (1.0 + z + 2.0 * X[:, 0] + 3.0 * X[:, 1] ** 2
            - np.log(1.0 - X[:, 2]) + ndtri(X[:, 3])
            + (1.0 + z - np.log(1.0 - tau)) * X[:, 4])


def generate_example3(n: int, p: int, seed: int):
    """Quantile-specified DGP on U(0, 1) covariates.

    The response is built comonotonically from a single uniform draw per
    row, so its conditional tau-quantile equals example3_quantile(X, tau)
    exactly for every tau at once. Returns (dataset, quantile_handle).
    """
    if p < 5:
        raise ValueError("example 3 needs p >= 5")
    X = derive_rng(seed, "ex3-covariates").uniform(0.0, 1.0, (n, p))
    U = derive_rng(seed, "ex3-mix").uniform(0.0, 1.0, n)
    base = (1.0 + 2.0 * X[:, 0] + 3.0 * X[:, 1] ** 2
            - np.log(1.0 - X[:, 2]) + ndtri(X[:, 3]) + X[:, 4])
    y = base + (1.0 + X[:, 4]) * ndtri(U) - X[:, 4] * np.log(1.0 - U)
    return Dataset(X, y), example3_quantile


def generate(spec: SimulationSpec, n: int, seed: int):
    """Draw one sample of the spec's DGP; returns (dataset, handle|None)."""
    if spec.example == 1:
        return generate_example1(n, spec.p, spec.error, seed), None
    if spec.example == 2:
        return generate_example2(n, spec.p, spec.error, spec.t_mix, seed), None
    return generate_example3(n, spec.p, seed)


def selection_metrics(weights: WeightVector, truth, p: int):
    """Counts of correctly/incorrectly zeroed weights and the
    correctly-fitted flag."""
    truth = frozenset(int(j) for j in truth)
    if not truth <= set(range(p)):
        raise ValueError("truth indices out of range")
    zeroed = set(range(p)) - set(weights.support)
    c = len(zeroed - truth)
    ic = len(zeroed & truth)
    cf = (c == p - len(truth)) and ic == 0
    return c, ic, cf


def mean_estimation_error(true_q, est_q) -> float:
    """Half the mean absolute gap between true and estimated quantiles."""
    true_q = np.asarray(true_q, dtype=float)
    est_q = np.asarray(est_q, dtype=float)
    if true_q.size == 0:
        raise ValueError("empty evaluation set")
    if true_q.shape != est_q.shape:
        raise ValueError("length mismatch")
    return 0.5 * float(np.mean(np.abs(true_q - est_q)))


@dataclass(frozen=True)
class ReplicationResult:
    method: str
    c: int | None
    ic: int | None
    cf: bool | None
    mpe_in: float
    mpe_out: float
    mee_in: float | None = None
    mee_out: float | None = None


def run_replication(spec: SimulationSpec, methods, r: int) -> dict[str, ReplicationResult]:
    train, handle = generate(spec, spec.n_tr, derive_seed(spec.seed, "train", r))
    test, _ = generate(spec, spec.n_te, derive_seed(spec.seed, "test", r))
    config = FitConfig(tau=spec.tau, seed=derive_seed(spec.seed, "fit", r))
    models = fit_many(train, config, methods)
    truth = true_support(spec.example, spec.p)
    out = {}
    for method in methods:
        model = models[method]
        pred_in = predict(model, train.X)
        pred_out = predict(model, test.X)
        penalized = method.startswith("P")
        c = ic = cf = None
        if penalized:
            c, ic, cf = selection_metrics(model.weights, truth, spec.p)
        mee_in = mee_out = None
        if handle is not None:
            mee_in = mean_estimation_error(handle(train.X, spec.tau), pred_in)
            mee_out = mean_estimation_error(handle(test.X, spec.tau), pred_out)
        out[method] = ReplicationResult(
            method=method,
            c=c, ic=ic, cf=cf,
            mpe_in=evaluate_mpe(train.y, pred_in, spec.tau),
            mpe_out=evaluate_mpe(test.y, pred_out, spec.tau),
            mee_in=mee_in,
            mee_out=mee_out,
        )
    return out


@dataclass(frozen=True)
class MonteCarloResult:
    spec: SimulationSpec
    methods: tuple[str, ...]
    replications: tuple[dict[str, ReplicationResult], ...]
    failures: int

    def metric(self, method: str, name: str) -> np.ndarray:
        vals = [getattr(rep[method], name) for rep in self.replications]
        return np.array([float(v) for v in vals if v is not None])

    def summary(self) -> list[dict]:
        """One row per method: mean and sd of every defined metric."""
        rows = []
        for method in self.methods:
            row = {"method": method, "n_reps": len(self.replications)}
            for name in ("c", "ic", "cf", "mpe_in", "mpe_out",
                         "mee_in", "mee_out"):
                vals = self.metric(method, name)
                if vals.size == 0:
                    row[name] = None
                else:
                    sd = float(np.std(vals, ddof=1)) if vals.size > 1 else 0.0
                    row[name] = (float(np.mean(vals)), sd)
            rows.append(row)
        return rows


def _mc_worker(args):
    spec, methods, r = args
    try:
        return r, run_replication(spec, methods, r)
    except (QuantAvgError, ValueError) as exc:
        return r, str(exc)


def run_monte_carlo(spec: SimulationSpec, methods=("PSMAQP",),
                    n_jobs: int = 1) -> MonteCarloResult:
    """Run the spec's replications and collect per-method metrics.

    Per-replication seeds are derived from (seed, r), so the result is
    identical for any n_jobs; failed replications are dropped and counted.
    """
    methods = tuple(methods)
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    tasks = [(spec, methods, r) for r in range(spec.replications)]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            raw = list(pool.map(_mc_worker, tasks, chunksize=1))
    else:
        raw = [_mc_worker(t) for t in tasks]
    raw.sort(key=lambda kv: kv[0])
    reps = []
    failures = 0
    for _, payload in raw:
        if isinstance(payload, str):
            failures += 1
        else:
            reps.append(payload)
    if not reps:
        raise QuantAvgError("every replication failed")
    return MonteCarloResult(spec=spec, methods=methods,
                            replications=tuple(reps), failures=failures)
