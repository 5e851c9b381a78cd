#!/usr/bin/env python3
"""Full example-1 study: all four methods, three error laws.

Paper-scale is 500 replications; pass --reps to shrink for a desk run.
"""

import argparse

from quantavg.reports import emit_report, simulation_table
from quantavg.simulate import SimulationSpec, run_monte_carlo

METHODS = ("SMAMP", "PSMAMP", "SMAQP", "PSMAQP")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--ntr", type=int, default=400, choices=(200, 400))
    ap.add_argument("--tau", type=float, default=0.5)
    ap.add_argument("--reps", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=2)
    ap.add_argument("--out", default="reports")
    args = ap.parse_args()

    tables = []
    for error in ("SN", "T3", "MN"):
        spec = SimulationSpec(example=1, n_tr=args.ntr, n_te=100, error=error,
                              tau=args.tau, replications=args.reps,
                              seed=args.seed)
        methods = METHODS if args.tau == 0.5 else ("SMAQP", "PSMAQP")
        result = run_monte_carlo(spec, methods, n_jobs=args.jobs)
        tables.append(simulation_table(result))
        print(f"done: error={error}")
    paths = emit_report(tables, args.out,
                        f"example1_ntr{args.ntr}_tau{args.tau:g}")
    for p in paths:
        print(p)


if __name__ == "__main__":
    main()
