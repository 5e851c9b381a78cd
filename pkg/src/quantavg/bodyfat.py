"""The body-fat prediction study.

Protocol: log-transform the thirteen body-measurement predictors, split
into train/test over many random partitions, compare methods by
out-of-sample mean check loss, and report full-sample weights with
bootstrap standard errors. The dataset itself is not bundled; see the
README for where to obtain the 252-row CSV.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .data import Dataset, random_split
from .errors import NumericalError, QuantAvgError
from .io import ColumnSchema, load_csv
from .pipeline import (FitConfig, bootstrap_weight_se, evaluate_mpe, fit_many,
                       predict)
from .reports import ReportTable, _cell
from .rng import derive_seed

PREDICTORS = ("Age", "Weight", "Height", "Neck", "Chest", "Abdomen", "Hip",
              "Thigh", "Knee", "Ankle", "Biceps", "Forearm", "Wrist")
RESPONSE = "BodyFat"


def bodyfat_schema() -> ColumnSchema:
    return ColumnSchema(response=RESPONSE, predictors=PREDICTORS,
                        transform="log")


def load_bodyfat(path) -> Dataset:
    data = load_csv(path, bodyfat_schema())
    return data


@dataclass(frozen=True)
class SplitOutcome:
    tau: float
    method: str
    mpe_in: float
    mpe_out: float


@dataclass(frozen=True)
class BodyfatResult:
    n_tr: int
    n_splits: int
    taus: tuple[float, ...]
    methods: tuple[str, ...]
    outcomes: tuple[tuple[SplitOutcome, ...], ...]  # per split
    failed_splits: int
    full_weights: dict[str, np.ndarray]    # method -> [w0, w1..wp]
    weight_se: dict[str, np.ndarray] | None
    bootstrap_draws: int

    def mpe_summary(self):
        """One row per (method, tau), in that order: mean/sd of MPEs."""
        rows = []
        for method in self.methods:
            for tau in self.taus:
                ins = [o.mpe_in for split in self.outcomes for o in split
                       if o.tau == tau and o.method == method]
                outs = [o.mpe_out for split in self.outcomes for o in split
                        if o.tau == tau and o.method == method]
                rows.append({
                    "tau": tau,
                    "method": method,
                    "mpe_in": (float(np.mean(ins)), float(np.std(ins, ddof=1))),
                    "mpe_out": (float(np.mean(outs)), float(np.std(outs, ddof=1))),
                })
        return rows


def _one_split(data: Dataset, n_tr: int, taus, methods, seed: int, s: int):
    train, test = random_split(data, n_tr, derive_seed(seed, "bodyfat-split", s))
    out = []
    for tau in taus:
        config = FitConfig(tau=tau, seed=derive_seed(seed, "bodyfat-fit", s))
        models = fit_many(train, config, methods)
        for method in methods:
            model = models[method]
            out.append(SplitOutcome(
                tau=tau,
                method=method,
                mpe_in=evaluate_mpe(train.y, predict(model, train.X), tau),
                mpe_out=evaluate_mpe(test.y, predict(model, test.X), tau),
            ))
    return tuple(out)


def _split_worker(args):
    data, n_tr, taus, methods, seed, s = args
    try:
        return s, _one_split(data, n_tr, taus, methods, seed, s)
    except (QuantAvgError, ValueError) as exc:
        return s, str(exc)


def run_bodyfat(data: Dataset, n_tr: int, n_splits: int, taus, methods,
                seed: int = 0, bootstrap_B: int = 0,
                n_jobs: int = 1) -> BodyfatResult:
    """Random-partition prediction study plus a full-sample weight table.

    bootstrap_B = 0 skips the bootstrap standard errors. More than 1% of
    failed splits aborts with diagnostics.
    """
    taus = tuple(float(t) for t in taus)
    methods = tuple(methods)
    tasks = [(data, n_tr, taus, methods, seed, s) for s in range(n_splits)]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            raw = list(pool.map(_split_worker, tasks, chunksize=1))
    else:
        raw = [_split_worker(t) for t in tasks]
    raw.sort(key=lambda kv: kv[0])
    outcomes = []
    errors = []
    for s, payload in raw:
        if isinstance(payload, str):
            errors.append(f"split {s}: {payload}")
        else:
            outcomes.append(payload)
    if len(errors) > max(1, n_splits) * 0.01:
        detail = "; ".join(errors[:5])
        raise NumericalError(
            f"{len(errors)} of {n_splits} splits failed (> 1%): {detail}")

    # full-sample weights at the first tau, plus bootstrap SEs if requested
    full_tau = taus[0]
    full_config = FitConfig(tau=full_tau, seed=derive_seed(seed, "bodyfat-full"))
    full_models = fit_many(data, full_config, methods)
    full_weights = {
        m: np.concatenate([[full_models[m].weights.w0], full_models[m].weights.w])
        for m in methods
    }
    weight_se = None
    if bootstrap_B > 0:
        weight_se = {}
        for m in methods:
            bs = bootstrap_weight_se(
                data, FitConfig(tau=full_tau, method=m,
                                seed=derive_seed(seed, "bodyfat-full")),
                bootstrap_B, derive_seed(seed, "bodyfat-boot"))
            weight_se[m] = bs.se
    return BodyfatResult(
        n_tr=n_tr,
        n_splits=n_splits,
        taus=taus,
        methods=methods,
        outcomes=tuple(outcomes),
        failed_splits=len(errors),
        full_weights=full_weights,
        weight_se=weight_se,
        bootstrap_draws=bootstrap_B,
    )


def bodyfat_tables(result: BodyfatResult) -> list[ReportTable]:
    """Prediction summary (x 10^-2, paper style) and the weight table."""
    rows = []
    for row in result.mpe_summary():
        scale = lambda t: (t[0] * 100.0, t[1] * 100.0)
        rows.append((row["method"], f"{row['tau']:g}",
                     _cell(scale(row["mpe_in"])), _cell(scale(row["mpe_out"]))))
    pred = ReportTable(
        title="Body-fat prediction errors (x 1e-2): mean (sd) over splits",
        columns=("method", "tau", "mpe_in", "mpe_out"),
        rows=tuple(rows),
        note=(f"n_tr={result.n_tr}, n_splits={result.n_splits}, "
              f"failed={result.failed_splits}"),
    )
    wrows = []
    p = len(PREDICTORS)
    for k in range(p + 1):
        label = "w0" if k == 0 else f"w{k}"
        cells = [label]
        for m in result.methods:
            est = result.full_weights[m][k]
            if result.weight_se is not None:
                cells.append(_cell((est, float(result.weight_se[m][k]))))
            else:
                cells.append(_cell(float(est)))
        wrows.append(tuple(cells))
    note = (f"full-sample fit at tau={result.taus[0]:g}"
            + (f", bootstrap SDs from {result.bootstrap_draws} draws"
               if result.weight_se is not None else ""))
    weights = ReportTable(
        title="Body-fat estimated weights" +
              (" (bootstrap sd)" if result.weight_se is not None else ""),
        columns=("weight", *result.methods),
        rows=tuple(wrows),
        note=note,
    )
    return [pred, weights]
