"""Metrics, report serialization, and the (K1, K2) sweep.

Reports serialize to JSON with canonical key ordering so identical runs
produce byte-identical files; sweep CSV cells are keyed by grid point so the
output does not depend on the degree of parallelism.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .engine import (
    AppRecord,
    SimConfig,
    SimulationReport,
    TickSample,
    run,
    sim_config_from_dict,
)
from .shaper import BufferParams
from .workload import WorkloadTrace, load_trace


class NoCompletedAppsError(Exception):
    pass


def turnaround_stats(report: SimulationReport) -> dict:
    """Turnaround = completion - first submission, spanning resubmissions."""
    values = [a.turnaround for a in report.apps if a.turnaround is not None]
    if not values:
        raise NoCompletedAppsError("no completed applications in report")
    arr = np.array(values, dtype=float)
    return {
        "count": len(values),
        "mean": float(arr.mean()),
        "median": float(np.percentile(arr, 50)),
        "q1": float(np.percentile(arr, 25)),
        "q3": float(np.percentile(arr, 75)),
        "max": float(arr.max()),
    }


def slack_stats(report: SimulationReport) -> dict:
    """Per-app slack distribution plus the cluster time-aggregate.

    Per-app slack = sum over ticks of (allocated - used) / sum of allocated,
    per resource, over the app's running components. Apps with zero
    allocation ticks are excluded and counted.
    """
    per_app_cpu, per_app_mem = [], []
    excluded = 0
    for a in report.apps:
        if a.alloc_cpu_ticks <= 0 and a.alloc_mem_ticks <= 0:
            excluded += 1
            continue
        if a.alloc_cpu_ticks > 0:
            per_app_cpu.append(1.0 - a.used_cpu_ticks / a.alloc_cpu_ticks)
        if a.alloc_mem_ticks > 0:
            per_app_mem.append(1.0 - a.used_mem_ticks / a.alloc_mem_ticks)
    total_alloc_cpu = sum(t.alloc_cpus for t in report.ticks)
    total_used_cpu = sum(t.used_cpus for t in report.ticks)
    total_alloc_mem = sum(t.alloc_mem for t in report.ticks)
    total_used_mem = sum(t.used_mem for t in report.ticks)
    cluster_cpu = (1.0 - total_used_cpu / total_alloc_cpu
                   if total_alloc_cpu > 0 else 0.0)
    cluster_mem = (1.0 - total_used_mem / total_alloc_mem
                   if total_alloc_mem > 0 else 0.0)
    return {
        "cluster_cpu_slack": cluster_cpu,
        "cluster_mem_slack": cluster_mem,
        "per_app_cpu": per_app_cpu,
        "per_app_mem": per_app_mem,
        "excluded_apps": excluded,
    }


def failure_stats(report: SimulationReport) -> dict:
    total = len(report.apps)
    failed = sum(1 for a in report.apps if a.failure_count >= 1)
    lost = sum(a.lost_work for a in report.apps)
    return {
        "failure_pct": (100.0 * failed / total) if total else 0.0,
        "failed_apps": failed,
        "lost_work": lost,
    }


def compute_aggregates(report: SimulationReport) -> dict:
    slack = slack_stats(report)
    failures = failure_stats(report)
    try:
        turn = turnaround_stats(report)
        mean_turnaround = turn["mean"]
        median_turnaround = turn["median"]
    except NoCompletedAppsError:
        mean_turnaround = None
        median_turnaround = None
    return {
        "mean_turnaround_s": mean_turnaround,
        "median_turnaround_s": median_turnaround,
        "cpu_slack": slack["cluster_cpu_slack"],
        "mem_slack": slack["cluster_mem_slack"],
        "failure_pct": failures["failure_pct"],
        "lost_work": failures["lost_work"],
    }


# --- report serialization -----------------------------------------------------

def report_to_dict(report: SimulationReport, include_config: bool = True) -> dict:
    d = {
        "apps": [{
            "id": a.id, "kind": a.kind,
            "first_submission": a.first_submission,
            "completion": a.completion, "turnaround": a.turnaround,
            "failure_count": a.failure_count, "lost_work": a.lost_work,
            "permanently_failed": a.permanently_failed,
            "alloc_cpu_ticks": a.alloc_cpu_ticks,
            "used_cpu_ticks": a.used_cpu_ticks,
            "alloc_mem_ticks": a.alloc_mem_ticks,
            "used_mem_ticks": a.used_mem_ticks,
            "total_work": a.total_work,
            "accrued_work": a.accrued_work,
            "ledger_total": a.ledger_total,
        } for a in report.apps],
        "ticks": [[t.t, t.alloc_cpus, t.alloc_mem, t.used_cpus, t.used_mem]
                  for t in report.ticks],
        "aggregates": report.aggregates,
    }
    if include_config:
        d["config"] = report.config
    return d


def report_from_dict(d: dict) -> SimulationReport:
    apps = [AppRecord(**a) for a in d["apps"]]
    ticks = [TickSample(*row) for row in d["ticks"]]
    return SimulationReport(config=d.get("config", {}), apps=apps,
                            ticks=ticks, aggregates=d["aggregates"])


def report_to_json(report: SimulationReport, include_config: bool = True) -> str:
    return json.dumps(report_to_dict(report, include_config=include_config),
                      sort_keys=True, separators=(",", ":"))


def write_report(report: SimulationReport, path: str) -> None:
    atomic_write_text(path, report_to_json(report))


def load_report(path: str) -> SimulationReport:
    with open(path) as fh:
        return report_from_dict(json.load(fh))


def atomic_write_text(path: str, text: str) -> None:
    parent = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except Exception:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --- sweep ----------------------------------------------------------------------

@dataclass(frozen=True)
class SweepCell:
    k1: float
    k2: float
    turnaround_ratio: float
    mem_slack: float
    cpu_slack: float
    failure_pct: float


@dataclass
class SweepResult:
    baseline_mean_turnaround: float
    cells: list[SweepCell]


def _sweep_cell(args: tuple) -> tuple[tuple[float, float], dict]:
    trace_path, config_dict, k1, k2 = args
    trace = load_trace(trace_path)
    config = sim_config_from_dict(config_dict)
    config = replace(config, buffer=BufferParams(k1=k1, k2=k2))
    report = run(trace, config)
    return (k1, k2), report.aggregates


def sweep(trace_path: str, base_config: SimConfig,
          k1_values: list[float], k2_values: list[float],
          jobs: int = 1) -> SweepResult:
    """One run per (K1, K2) grid point plus a baseline reference run."""
    from .engine import _config_to_dict

    trace = load_trace(trace_path)
    baseline_config = replace(base_config, policy="baseline")
    baseline = run(trace, baseline_config)
    base_mean = baseline.aggregates["mean_turnaround_s"]
    if base_mean is None:
        raise NoCompletedAppsError("baseline run completed no applications")

    grid = [(k1, k2) for k1 in k1_values for k2 in k2_values]
    config_dict = _config_to_dict(base_config)
    tasks = [(trace_path, config_dict, k1, k2) for k1, k2 in grid]
    results: dict[tuple[float, float], dict] = {}
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for key, aggregates in pool.map(_sweep_cell, tasks):
                results[key] = aggregates
    else:
        for task in tasks:
            key, aggregates = _sweep_cell(task)
            results[key] = aggregates

    cells = []
    for k1, k2 in grid:
        agg = results[(k1, k2)]
        policy_mean = agg["mean_turnaround_s"]
        if policy_mean is None or policy_mean <= 0:
            raise NoCompletedAppsError(
                f"grid point (k1={k1}, k2={k2}) completed no applications"
            )
        cells.append(SweepCell(
            k1=k1, k2=k2,
            turnaround_ratio=base_mean / policy_mean,
            mem_slack=agg["mem_slack"], cpu_slack=agg["cpu_slack"],
            failure_pct=agg["failure_pct"],
        ))
    return SweepResult(baseline_mean_turnaround=base_mean, cells=cells)


def sweep_to_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["k1", "k2", "turnaround_ratio", "mem_slack",
                     "cpu_slack", "failure_pct"])
    for c in result.cells:
        writer.writerow([repr(c.k1), repr(c.k2), repr(c.turnaround_ratio),
                         repr(c.mem_slack), repr(c.cpu_slack),
                         repr(c.failure_pct)])
    return buf.getvalue()


def forecast_eval_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["kind", "kernel", "h", "series_id", "q1", "median",
                     "q3", "mean", "max"])
    for r in rows:
        writer.writerow([r["kind"], r["kernel"], r["h"], r["series_id"],
                         repr(r["q1"]), repr(r["median"]), repr(r["q3"]),
                         repr(r["mean"]), repr(r["max"])])
    return buf.getvalue()


def check_no_non_finite(report: SimulationReport) -> None:
    """Guard used before emitting any file: no NaN or inf anywhere."""
    def walk(obj):
        if isinstance(obj, float) and not math.isfinite(obj):
            raise ValueError("non-finite value in report")
        if isinstance(obj, dict):
            for v in obj.values():
                walk(v)
        if isinstance(obj, (list, tuple)):
            for v in obj:
                walk(v)
    walk(report_to_dict(report))
