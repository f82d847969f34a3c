#!/usr/bin/env python3
"""One-step-ahead forecaster error study on synthetic usage corpora.

For each usage pattern, replays every series through each forecaster and
reports the mean absolute error normalized by the reservation.

Usage:
    python scripts/forecaster_eval.py [--series 100] [--length 120]
        [--patterns spiky,periodic] [--h 10,40] [--seed 0] [--out eval.csv]
"""

import argparse

import numpy as np

from shapesim.forecast import ForecasterKind, evaluate_forecasters
from shapesim.report import atomic_write_text, forecast_eval_to_csv
from shapesim.workload import _pattern_fractions, _pattern_params


def build_corpus(pattern: str, n_series: int, length: int, seed: int):
    series, reservations = {}, {}
    rng = np.random.default_rng(seed)
    for i in range(n_series):
        params = _pattern_params(pattern, rng)
        frac = _pattern_fractions(pattern, params, length, rng)
        r = float(rng.uniform(2048, 12288))
        series[i] = np.asarray(frac) * r
        reservations[i] = r
    return series, reservations


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--series", type=int, default=100)
    parser.add_argument("--length", type=int, default=120)
    parser.add_argument("--patterns", default="spiky,periodic")
    parser.add_argument("--h", default="10")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default=None)
    args = parser.parse_args()

    hs = [int(x) for x in args.h.split(",")]
    for pattern in args.patterns.split(","):
        corpus, reservations = build_corpus(pattern, args.series,
                                            args.length, args.seed)
        kinds = [ForecasterKind("ari")]
        for h in hs:
            kinds.append(ForecasterKind("gp", kernel="exponential",
                                        h=h, n_max=h))
            kinds.append(ForecasterKind("gp", kernel="rbf", h=h, n_max=h))
        rows = evaluate_forecasters(corpus, reservations, kinds)
        print(f"pattern={pattern}")
        for kind in sorted({(r["kind"], r["kernel"], r["h"]) for r in rows}):
            sel = [r["mean"] for r in rows
                   if (r["kind"], r["kernel"], r["h"]) == kind]
            label = kind[0] if kind[0] != "gp" else f"gp-{kind[1]} h={kind[2]}"
            print(f"  {label:<22} mean normalized error "
                  f"{float(np.mean(sel)):.4f}")
        if args.out:
            stem, dot, ext = args.out.rpartition(".")
            path = f"{stem}-{pattern}.{ext}" if dot else f"{args.out}-{pattern}"
            atomic_write_text(path, forecast_eval_to_csv(rows))
            print(f"  wrote {len(rows)} rows to {path}")


if __name__ == "__main__":
    main()
