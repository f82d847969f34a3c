"""Command-line interface.

Subcommands:
  gen            generate a workload trace directory from a config file
  run            simulate a trace and write report.json (optionally CSVs)
  sweep          run the (K1, K2) grid and write the heatmap CSV
  eval-forecast  one-step-ahead error study over a trace's usage series

Exit codes: 0 success, 1 usage error, 2 runtime error. All outputs are
written atomically (temp file, then rename).

The env var SHAPESIM_SEED, when set, overrides both workload and sim seeds.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np

from .engine import run as run_sim, sim_config_from_dict
from .forecast import ForecasterKind, evaluate_forecasters
from .report import (
    atomic_write_text,
    check_no_non_finite,
    forecast_eval_to_csv,
    sweep,
    sweep_to_csv,
    write_report,
)
from .workload import config_from_dict, generate, load_trace, write_trace


class UsageError(Exception):
    pass


def _load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed config file {path}: {exc}")
    unknown = set(cfg) - {"workload", "sim"}
    if unknown:
        raise UsageError(f"unknown top-level config keys: {sorted(unknown)}")
    return cfg


def _seed_override() -> int | None:
    raw = os.environ.get("SHAPESIM_SEED")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"SHAPESIM_SEED must be an integer, got {raw!r}")


def cmd_gen(args: argparse.Namespace) -> None:
    cfg = _load_config_file(args.config)
    if "workload" not in cfg:
        raise UsageError("config file has no 'workload' section")
    wconfig = config_from_dict(cfg["workload"])
    seed = _seed_override()
    if seed is not None:
        wconfig = replace(wconfig, rng_seed=seed)
    trace = generate(wconfig)
    write_trace(trace, args.out)


def _load_sim_config(path: str):
    cfg = _load_config_file(path)
    if "sim" not in cfg:
        raise UsageError("config file has no 'sim' section")
    try:
        sconfig = sim_config_from_dict(cfg["sim"])
    except (ValueError, KeyError) as exc:
        raise UsageError(f"bad sim config: {exc}")
    seed = _seed_override()
    if seed is not None:
        sconfig = replace(sconfig, rng_seed=seed)
    return sconfig


def _load_trace_checked(path: str):
    if not os.path.isdir(path):
        raise UsageError(f"trace directory not found: {path}")
    return load_trace(path)


def cmd_run(args: argparse.Namespace) -> None:
    trace = _load_trace_checked(args.trace)
    sconfig = _load_sim_config(args.config)
    report = run_sim(trace, sconfig)
    check_no_non_finite(report)
    write_report(report, args.out)
    if args.csv:
        os.makedirs(args.csv, exist_ok=True)
        lines = ["t,alloc_cpus,alloc_mem,used_cpus,used_mem"]
        for t in report.ticks:
            lines.append(f"{t.t},{t.alloc_cpus!r},{t.alloc_mem!r},"
                         f"{t.used_cpus!r},{t.used_mem!r}")
        atomic_write_text(os.path.join(args.csv, "ticks.csv"),
                          "\n".join(lines) + "\n")


def _parse_float_list(raw: str, name: str) -> list[float]:
    try:
        return [float(x) for x in raw.split(",") if x != ""]
    except ValueError:
        raise UsageError(f"--{name} must be a comma-separated float list")


def cmd_sweep(args: argparse.Namespace) -> None:
    _load_trace_checked(args.trace)
    sconfig = _load_sim_config(args.config)
    k1s = _parse_float_list(args.k1, "k1")
    k2s = _parse_float_list(args.k2, "k2")
    if not k1s or not k2s:
        raise UsageError("--k1 and --k2 must be non-empty")
    result = sweep(args.trace, sconfig, k1s, k2s, jobs=args.jobs)
    atomic_write_text(args.out, sweep_to_csv(result))


def cmd_eval_forecast(args: argparse.Namespace) -> None:
    trace = _load_trace_checked(args.trace)
    kinds: list[ForecasterKind] = []
    for tag in args.kinds.split(","):
        tag = tag.strip()
        for h in _parse_float_list(args.h, "h"):
            h = int(h)
            if tag in ("gp", "gp-exponential"):
                kinds.append(ForecasterKind("gp", kernel="exponential",
                                            h=h, n_max=h))
            elif tag == "gp-rbf":
                kinds.append(ForecasterKind("gp", kernel="rbf", h=h, n_max=h))
            elif tag in ("ari", "oracle"):
                kinds.append(ForecasterKind(tag))
            else:
                raise UsageError(f"unknown forecaster kind {tag!r}")
    # Memory is the failure-critical resource; the error study uses it.
    series = {cid: np.array([s.memory for s in us.samples])
              for cid, us in trace.usage.items()}
    reservations = {}
    for app in trace.applications:
        for comp in app.all_components:
            reservations[comp.id] = comp.reservation.memory
    rows = evaluate_forecasters(series, reservations, kinds)
    atomic_write_text(args.out, forecast_eval_to_csv(rows))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shapesim")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a workload trace")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", help="simulate a trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run the (K1, K2) grid")
    p.add_argument("--trace", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--k1", required=True)
    p.add_argument("--k2", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("eval-forecast", help="forecaster error study")
    p.add_argument("--trace", required=True)
    p.add_argument("--kinds", required=True,
                   help="comma list: oracle,ari,gp-exponential,gp-rbf")
    p.add_argument("--h", default="10", help="comma list of history sizes")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval_forecast)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
