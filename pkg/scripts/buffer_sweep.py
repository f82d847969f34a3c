#!/usr/bin/env python3
"""Sweep the safe-guard buffer grid (K1, K2) and write a heatmap CSV.

Generates a trace, then runs the pessimistic policy once per grid cell.
The CSV has one row per cell with turnaround, slack, and failure metrics.

Usage:
    python scripts/buffer_sweep.py --out sweep.csv [--apps 500] [--seed 0]
        [--forecaster oracle|gp] [--k1 0,0.05,0.25,1.0] [--k2 0,1,3]
        [--jobs 1]
"""

import argparse
import tempfile

from shapesim.forecast import ForecasterKind
from shapesim.presets import desk_sim, desk_workload
from shapesim.report import atomic_write_text, sweep, sweep_to_csv
from shapesim.workload import generate, write_trace


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True)
    parser.add_argument("--apps", type=int, default=500)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--forecaster", choices=("oracle", "gp"),
                        default="oracle")
    parser.add_argument("--k1", default="0,0.05,0.25,1.0")
    parser.add_argument("--k2", default="0,1,3")
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args()

    k1s = [float(x) for x in args.k1.split(",")]
    k2s = [float(x) for x in args.k2.split(",")]
    kind = ForecasterKind(args.forecaster if args.forecaster == "oracle"
                          else "gp")
    base = desk_sim("pessimistic", forecaster=kind, seed=args.seed)

    trace = generate(desk_workload(seed=args.seed, n_applications=args.apps))
    with tempfile.TemporaryDirectory() as tmp:
        trace_dir = f"{tmp}/trace"
        write_trace(trace, trace_dir)
        result = sweep(trace_dir, base, k1s, k2s, jobs=args.jobs)
    atomic_write_text(args.out, sweep_to_csv(result))
    print(f"wrote {len(k1s) * len(k2s)} cells to {args.out}")


if __name__ == "__main__":
    main()
