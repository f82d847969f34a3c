"""Report aggregation, serialization, sweeps, and the command-line tool."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from shapesim.engine import run
from shapesim.presets import desk_sim, desk_workload, with_buffer
from shapesim.report import (
    NoCompletedAppsError,
    check_no_non_finite,
    compute_aggregates,
    load_report,
    report_from_dict,
    report_to_dict,
    report_to_json,
    slack_stats,
    sweep,
    sweep_to_csv,
    turnaround_stats,
    write_report,
)
from shapesim.workload import generate, write_trace


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    trace = generate(desk_workload(seed=2, n_applications=40))
    report = run(trace, desk_sim("pessimistic", seed=2))
    return trace, report


class TestAggregates:
    def test_turnaround_stats_match_records(self, small_run):
        _, report = small_run
        stats = turnaround_stats(report)
        values = [a.turnaround for a in report.apps if a.turnaround is not None]
        assert stats["count"] == len(values)
        assert stats["mean"] == pytest.approx(np.mean(values))
        assert stats["median"] == pytest.approx(np.median(values))
        assert stats["max"] == max(values)

    def test_failure_pct_matches_records(self, small_run):
        _, report = small_run
        agg = compute_aggregates(report)
        failed = sum(1 for a in report.apps if a.failure_count >= 1)
        assert agg["failure_pct"] == pytest.approx(
            100.0 * failed / len(report.apps))
        assert agg["lost_work"] == pytest.approx(
            sum(a.lost_work for a in report.apps))

    def test_cluster_slack_matches_tick_sums(self, small_run):
        _, report = small_run
        stats = slack_stats(report)
        alloc = sum(t.alloc_mem for t in report.ticks)
        used = sum(t.used_mem for t in report.ticks)
        assert stats["cluster_mem_slack"] == pytest.approx(1.0 - used / alloc)
        assert 0.0 <= stats["cluster_mem_slack"] <= 1.0

    def test_no_completed_apps_raises(self, small_run):
        _, report = small_run
        empty = report_from_dict(report_to_dict(report))
        empty.apps = [r for r in empty.apps if r.completion is None]
        with pytest.raises(NoCompletedAppsError):
            turnaround_stats(empty)

    def test_check_no_non_finite_accepts_real_report(self, small_run):
        _, report = small_run
        check_no_non_finite(report)


class TestSerialization:
    def test_json_round_trip_preserves_records(self, small_run, tmp_path):
        _, report = small_run
        path = str(tmp_path / "report.json")
        write_report(report, path)
        loaded = load_report(path)
        assert report_to_json(loaded) == report_to_json(report)
        assert [r.id for r in loaded.apps] == [r.id for r in report.apps]

    def test_json_is_deterministic_text(self, small_run):
        _, report = small_run
        assert report_to_json(report) == report_to_json(report)
        # Keys are sorted so the output is insensitive to dict ordering.
        d = json.loads(report_to_json(report))
        assert list(d) == sorted(d)


@pytest.fixture(scope="module")
def trace_dir(tmp_path_factory):
    path = str(tmp_path_factory.mktemp("sweep") / "trace")
    write_trace(generate(desk_workload(seed=4, n_applications=25)), path)
    return path


class TestSweep:
    def test_sweep_parallel_matches_serial(self, trace_dir):
        base = desk_sim("pessimistic", seed=4)
        k1s, k2s = [0.0, 0.05], [0.0, 3.0]
        serial = sweep(trace_dir, base, k1s, k2s, jobs=1)
        parallel = sweep(trace_dir, base, k1s, k2s, jobs=4)
        assert sweep_to_csv(serial) == sweep_to_csv(parallel)

    def test_sweep_covers_grid(self, trace_dir):
        base = desk_sim("pessimistic", seed=4)
        result = sweep(trace_dir, base, [0.0, 1.0], [0.0], jobs=1)
        csv = sweep_to_csv(result)
        lines = csv.strip().splitlines()
        assert len(lines) == 3  # header + 2 cells
        assert lines[0].startswith("k1,k2,")


def run_cli(args, env_extra=None):
    env = dict(os.environ)
    env.pop("SHAPESIM_SEED", None)
    if env_extra:
        env.update(env_extra)
    return subprocess.run([sys.executable, "-m", "shapesim.cli", *args],
                          capture_output=True, text=True, env=env)


@pytest.fixture(scope="module")
def cli_workspace(tmp_path_factory):
    """Config file plus a generated trace directory for CLI tests."""
    root = tmp_path_factory.mktemp("cli")
    from shapesim.workload import _config_to_dict
    from shapesim.engine import _config_to_dict as sim_to_dict
    cfg = {
        "workload": _config_to_dict(desk_workload(seed=6, n_applications=15)),
        "sim": sim_to_dict(desk_sim("pessimistic", seed=6)),
    }
    cfg_path = str(root / "config.json")
    with open(cfg_path, "w") as fh:
        json.dump(cfg, fh)
    trace_path = str(root / "trace")
    assert run_cli(["gen", "--config", cfg_path,
                    "--out", trace_path]).returncode == 0
    return root, cfg_path, trace_path


class TestCli:
    def test_gen_writes_trace_dir(self, cli_workspace):
        _, _, trace_path = cli_workspace
        assert os.path.exists(os.path.join(trace_path, "manifest.json"))
        assert os.path.exists(os.path.join(trace_path, "usage.csv"))

    def test_run_writes_report_and_csv(self, cli_workspace):
        root, cfg_path, trace_path = cli_workspace
        out = str(root / "report.json")
        csv_dir = str(root / "csv")
        res = run_cli(["run", "--trace", trace_path, "--config", cfg_path,
                       "--out", out, "--csv", csv_dir])
        assert res.returncode == 0, res.stderr
        report = load_report(out)
        assert report.apps
        with open(os.path.join(csv_dir, "ticks.csv")) as fh:
            assert fh.readline().startswith("t,alloc_cpus")

    def test_run_is_byte_deterministic(self, cli_workspace):
        root, cfg_path, trace_path = cli_workspace
        outs = []
        for name in ("r1.json", "r2.json"):
            out = str(root / name)
            assert run_cli(["run", "--trace", trace_path, "--config", cfg_path,
                            "--out", out]).returncode == 0
            with open(out, "rb") as fh:
                outs.append(fh.read())
        assert outs[0] == outs[1]

    def test_seed_env_override_changes_output(self, cli_workspace):
        root, cfg_path, trace_path = cli_workspace
        a = str(root / "seed7.json")
        b = str(root / "seed8.json")
        for path, seed in ((a, "7"), (b, "8")):
            res = run_cli(["run", "--trace", trace_path, "--config", cfg_path,
                           "--out", path], env_extra={"SHAPESIM_SEED": seed})
            assert res.returncode == 0, res.stderr
        assert json.load(open(a))["config"]["rng_seed"] == 7
        assert json.load(open(b))["config"]["rng_seed"] == 8

    def test_sweep_cli_and_unit_buffer_ratio(self, cli_workspace):
        root, cfg_path, trace_path = cli_workspace
        out = str(root / "sweep.csv")
        res = run_cli(["sweep", "--trace", trace_path, "--config", cfg_path,
                       "--k1", "0.05,1.0", "--k2", "0.0", "--out", out])
        assert res.returncode == 0, res.stderr
        rows = open(out).read().strip().splitlines()
        assert rows[0].startswith("k1,k2,")
        assert len(rows) == 3

    def test_eval_forecast_writes_rows(self, cli_workspace):
        root, _, trace_path = cli_workspace
        out = str(root / "fc.csv")
        res = run_cli(["eval-forecast", "--trace", trace_path,
                       "--kinds", "oracle,ari", "--h", "10", "--out", out])
        assert res.returncode == 0, res.stderr
        lines = open(out).read().strip().splitlines()
        assert len(lines) > 1

    def test_usage_error_exit_code(self, cli_workspace, tmp_path):
        root, cfg_path, trace_path = cli_workspace
        missing = run_cli(["run", "--trace", str(tmp_path / "nope"),
                           "--config", cfg_path, "--out", str(root / "x")])
        assert missing.returncode == 1
        bad_cfg = str(tmp_path / "bad.json")
        with open(bad_cfg, "w") as fh:
            fh.write('{"sim": {"policy": "pessimistic"}, "zzz": 1}')
        res = run_cli(["run", "--trace", trace_path, "--config", bad_cfg,
                       "--out", str(root / "y")])
        assert res.returncode == 1
        assert "unknown" in res.stderr

    def test_runtime_error_exit_code(self, cli_workspace, tmp_path):
        root, cfg_path, _ = cli_workspace
        # Structurally valid trace dir that fails to parse -> exit 2.
        broken = tmp_path / "broken"
        broken.mkdir()
        (broken / "manifest.json").write_text("{not json")
        res = run_cli(["run", "--trace", str(broken), "--config", cfg_path,
                       "--out", str(root / "z")])
        assert res.returncode == 2
