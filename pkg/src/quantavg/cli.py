"""Command-line front end.

Subcommands: simulate (Monte Carlo studies), fit (train on a CSV),
predict (apply a saved model), bodyfat (the body-fat study protocol).
A JSON config file may supply any long-option defaults; explicit flags
win. Exit codes: 0 ok, 1 usage/config, 2 data, 3 numerical.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .bodyfat import bodyfat_tables, load_bodyfat, run_bodyfat
from .errors import ConfigError, DataError, NumericalError, QuantAvgError
from .io import load_csv, schema_from_json
from .pipeline import (METHODS, FitConfig, fit, load_model, predict,
                       save_model)
from .reports import emit_report, simulation_table
from .simulate import ERROR_LAWS, SimulationSpec, run_monte_carlo


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _methods_list(text: str) -> tuple[str, ...]:
    methods = tuple(m.strip().upper() for m in text.split(",") if m.strip())
    if not methods:
        raise ConfigError("empty method list")
    for m in methods:
        if m not in METHODS:
            raise ConfigError(f"unknown method {m!r}; choose from {METHODS}")
    return methods


def _taus_list(text: str) -> tuple[float, ...]:
    try:
        taus = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise ConfigError(f"bad tau list {text!r}") from exc
    if not taus:
        raise ConfigError("empty tau list")
    for t in taus:
        if not 0.0 < t < 1.0:
            raise ConfigError(f"tau must lie in (0, 1), got {t}")
    return taus


def build_parser() -> _Parser:
    parser = _Parser(prog="quantavg",
                     description="Semiparametric model-averaging quantile "
                                 "prediction")
    parser.add_argument("--config", help="JSON file with default options")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte Carlo study")
    sim.add_argument("--example", type=int, choices=(1, 2, 3), required=True)
    sim.add_argument("--ntr", type=int, required=True)
    sim.add_argument("--nte", type=int, default=100)
    sim.add_argument("--error", default="sn",
                     help="sn, t3 or mn (ignored by example 3)")
    sim.add_argument("--tau", type=float, default=0.5)
    sim.add_argument("--reps", type=int, default=500)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--methods", default="PSMAQP",
                     help="comma list from " + ",".join(METHODS))
    sim.add_argument("--t-mix", type=float, default=1.0,
                     help="common-factor strength for example 2")
    sim.add_argument("--jobs", type=int, default=1)
    sim.add_argument("--out", default="reports")

    fitp = sub.add_parser("fit", help="fit a model to a CSV dataset")
    fitp.add_argument("--input", required=True)
    fitp.add_argument("--schema", required=True,
                      help="JSON: response, predictors, transform")
    fitp.add_argument("--tau", type=float, default=0.5)
    fitp.add_argument("--method", default="PSMAQP")
    fitp.add_argument("--seed", type=int, default=0)
    fitp.add_argument("--model", default="model.json",
                      help="where to write the fitted model")

    pred = sub.add_parser("predict", help="predict with a saved model")
    pred.add_argument("--model", required=True)
    pred.add_argument("--input", required=True,
                      help="CSV whose columns are the model's predictors")
    pred.add_argument("--out", default="predictions.csv")

    bf = sub.add_parser("bodyfat", help="run the body-fat study")
    bf.add_argument("--input", required=True, help="body-fat CSV path")
    bf.add_argument("--ntr", type=int, default=150)
    bf.add_argument("--splits", type=int, default=500)
    bf.add_argument("--tau", default="0.5", help="comma list of levels")
    bf.add_argument("--methods", default="SMAMP,PSMAMP,SMAQP,PSMAQP")
    bf.add_argument("--bootstrap", type=int, default=0,
                    help="bootstrap draws for weight SEs (0 = skip)")
    bf.add_argument("--seed", type=int, default=0)
    bf.add_argument("--jobs", type=int, default=1)
    bf.add_argument("--out", default="reports")
    return parser


def parse_args(argv=None):
    parser = build_parser()
    args, _ = parser.parse_known_args(argv)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                defaults = json.load(fh)
        except OSError as exc:
            raise DataError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid config JSON: {exc}") from exc
        if not isinstance(defaults, dict):
            raise ConfigError("config file must hold a JSON object")
        known = {a.dest for a in parser._actions}
        for spa in parser._subparsers._group_actions:
            for p in spa.choices.values():
                known |= {a.dest for a in p._actions}
        bad = set(defaults) - known
        if bad:
            raise ConfigError(f"unknown config keys: {sorted(bad)}")
        parser.set_defaults(**defaults)
        for p in parser._subparsers._group_actions[0].choices.values():
            p.set_defaults(**{k: v for k, v in defaults.items()
                              if k in {a.dest for a in p._actions}})
    return parser.parse_args(argv)


def _cmd_simulate(args) -> int:
    error = args.error.upper()
    if error not in ERROR_LAWS:
        raise ConfigError(f"unknown error law {args.error!r}")
    methods = _methods_list(args.methods)
    try:
        spec = SimulationSpec(example=args.example, n_tr=args.ntr,
                              n_te=args.nte, error=error, tau=args.tau,
                              replications=args.reps, seed=args.seed,
                              t_mix=args.t_mix)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    result = run_monte_carlo(spec, methods, n_jobs=args.jobs)
    base = (f"simulate_ex{spec.example}_{spec.error.lower()}"
            f"_tau{spec.tau:g}_ntr{spec.n_tr}_seed{spec.seed}")
    paths = emit_report([simulation_table(result)], args.out, base)
    for p in paths:
        print(p)
    return 0


def _cmd_fit(args) -> int:
    schema = schema_from_json(args.schema)
    data = load_csv(args.input, schema)
    config = FitConfig(tau=args.tau, method=args.method.upper(),
                       seed=args.seed)
    model = fit(data, config)
    save_model(model, args.model)
    lam = (model.selection.chosen_lambda if model.selection
           else model.cv_lambda)
    print(f"fitted {config.method} at tau={config.tau:g} on n={data.n}, "
          f"p={data.p}; support size {len(model.weights.support)}"
          + (f"; lambda={lam:.6g}" if lam is not None else ""))
    print(f"model written to {args.model}")
    return 0


def _cmd_predict(args) -> int:
    model = load_model(args.model)
    path = Path(args.input)
    if not path.exists():
        raise DataError(f"input file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty file")
        rows = list(reader)
    if len(header) != model.p:
        raise DataError(f"{path}: expected {model.p} predictor columns, "
                        f"found {len(header)}")
    try:
        X = np.array([[float(c) for c in row] for row in rows])
    except ValueError as exc:
        raise DataError(f"{path}: unparseable cell: {exc}") from exc
    yhat = predict(model, X)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["prediction"])
        for v in yhat:
            writer.writerow([repr(float(v))])
    print(f"{len(yhat)} predictions written to {args.out}")
    return 0


def _cmd_bodyfat(args) -> int:
    if args.bootstrap < 0 or 0 < args.bootstrap < 100:
        raise ConfigError("bootstrap draws must be 0 (skip) or at least 100")
    data = load_bodyfat(args.input)
    taus = _taus_list(args.tau)
    methods = _methods_list(args.methods)
    result = run_bodyfat(data, n_tr=args.ntr, n_splits=args.splits,
                         taus=taus, methods=methods, seed=args.seed,
                         bootstrap_B=args.bootstrap, n_jobs=args.jobs)
    base = f"bodyfat_ntr{args.ntr}_splits{args.splits}_seed{args.seed}"
    paths = emit_report(bodyfat_tables(result), args.out, base)
    for p in paths:
        print(p)
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "fit": _cmd_fit,
    "predict": _cmd_predict,
    "bodyfat": _cmd_bodyfat,
}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, QuantAvgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
