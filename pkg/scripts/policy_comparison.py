#!/usr/bin/env python3
"""Compare baseline, optimistic, and pessimistic policies on one workload.

Runs every policy on the same generated trace (oracle forecaster) and
prints a metrics table; optionally writes the full reports as JSON.

Usage:
    python scripts/policy_comparison.py [--workload desk|contended]
        [--apps 1000] [--seed 0] [--k1 0.05] [--k2 3.0] [--out-dir DIR]
"""

import argparse
import os

from shapesim.engine import run
from shapesim.presets import desk_sim, desk_workload, desk_workload_contended, with_buffer
from shapesim.report import compute_aggregates, write_report
from shapesim.workload import generate


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workload", choices=("desk", "contended"),
                        default="desk")
    parser.add_argument("--apps", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--k1", type=float, default=0.05)
    parser.add_argument("--k2", type=float, default=3.0)
    parser.add_argument("--out-dir", default=None,
                        help="write report-<policy>.json files here")
    args = parser.parse_args()

    make = desk_workload if args.workload == "desk" else desk_workload_contended
    trace = generate(make(seed=args.seed, n_applications=args.apps))

    header = (f"{'policy':<12} {'mean turn (s)':>14} {'median (s)':>11} "
              f"{'mem slack':>10} {'fail %':>7} {'lost work':>12}")
    print(header)
    print("-" * len(header))
    for policy in ("baseline", "optimistic", "pessimistic"):
        config = with_buffer(desk_sim(policy, seed=args.seed),
                             args.k1, args.k2)
        report = run(trace, config)
        agg = compute_aggregates(report)
        print(f"{policy:<12} {agg['mean_turnaround_s']:>14.0f} "
              f"{agg['median_turnaround_s']:>11.0f} "
              f"{agg['mem_slack']:>10.3f} {agg['failure_pct']:>7.2f} "
              f"{agg['lost_work']:>12.0f}")
        if args.out_dir:
            os.makedirs(args.out_dir, exist_ok=True)
            write_report(report, os.path.join(args.out_dir,
                                              f"report-{policy}.json"))


if __name__ == "__main__":
    main()
