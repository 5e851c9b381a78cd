#!/usr/bin/env python3
"""Body-fat study: split-based prediction errors plus the full-sample
weight table with bootstrap standard errors.

Needs the 252-row body-fat CSV (see README for the source and format).
"""

import argparse

from quantavg.bodyfat import bodyfat_tables, load_bodyfat, run_bodyfat
from quantavg.reports import emit_report


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--input", default="data/bodyfat.csv")
    ap.add_argument("--ntr", type=int, default=150, choices=(150, 200))
    ap.add_argument("--splits", type=int, default=500)
    ap.add_argument("--bootstrap", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=2)
    ap.add_argument("--out", default="reports")
    args = ap.parse_args()

    data = load_bodyfat(args.input)
    result = run_bodyfat(data, n_tr=args.ntr, n_splits=args.splits,
                         taus=(0.5, 0.25, 0.75),
                         methods=("SMAMP", "PSMAMP", "SMAQP", "PSMAQP"),
                         seed=args.seed, bootstrap_B=args.bootstrap,
                         n_jobs=args.jobs)
    paths = emit_report(bodyfat_tables(result), args.out,
                        f"bodyfat_ntr{args.ntr}")
    for p in paths:
        print(p)


if __name__ == "__main__":
    main()
