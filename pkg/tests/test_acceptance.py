"""End-to-end acceptance checks, one test per headline claim.

Each test prints a single summary line (visible with `pytest -s` or on
failure) and asserts the claim. Simulation results are cached per
(workload, policy, buffer, seed) cell in a session fixture because several
criteria share runs.
"""

import math

import numpy as np
import pytest

from shapesim.engine import SimConfig, run
from shapesim.forecast import (
    ForecasterKind,
    GPModel,
    evaluate_forecasters,
    gp_posterior,
)
from shapesim.forecast import _kernel_matrix, ari_fit, ari_forecast
from shapesim.presets import (
    desk_sim,
    desk_workload,
    desk_workload_contended,
    with_buffer,
)
from shapesim.report import compute_aggregates, report_to_json, sweep, sweep_to_csv
from shapesim.workload import generate, write_trace

SEEDS = range(5)


@pytest.fixture(scope="session")
def cells():
    """Memoized (workload, policy, k1, k2, seed) -> summary dict."""
    traces: dict = {}
    cache: dict = {}

    def trace_for(workload: str, seed: int, n: int):
        key = (workload, seed, n)
        if key not in traces:
            cfg = {"desk": desk_workload,
                   "contended": desk_workload_contended}[workload]
            traces[key] = generate(cfg(seed=seed, n_applications=n))
        return traces[key]

    def get(workload: str, policy: str, k1: float, k2: float, seed: int,
            n: int = 1000, forecaster: str = "oracle"):
        key = (workload, policy, k1, k2, seed, n, forecaster)
        if key in cache:
            return cache[key]
        trace = trace_for(workload, seed, n)
        kind = (ForecasterKind("oracle") if forecaster == "oracle"
                else ForecasterKind("gp", kernel=forecaster))
        config = with_buffer(desk_sim(policy, forecaster=kind, seed=seed),
                             k1, k2)
        report = run(trace, config)
        agg = compute_aggregates(report)
        runtime = {a.id: a.total_work / len(a.all_components)
                   for a in trace.applications}
        queueing = [r.turnaround - runtime[r.id] for r in report.apps
                    if r.turnaround is not None]
        cache[key] = {
            "fail": agg["failure_pct"],
            "mem_slack": agg["mem_slack"],
            "mean_turnaround": agg["mean_turnaround_s"],
            "median_queueing": float(np.median(queueing)) if queueing else 0.0,
            "median_runtime": float(np.median(list(runtime.values()))),
            "conservation": [(r.total_work, r.ledger_total, r.lost_work,
                              r.completion is not None) for r in report.apps],
        }
        return cache[key]

    return get


def test_criterion_01_full_buffer_equals_static_reservation():
    trace = generate(desk_workload(seed=0, n_applications=200))
    degenerate = run(trace, with_buffer(desk_sim("pessimistic", seed=0),
                                        1.0, 0.0))
    baseline = run(trace, desk_sim("baseline", seed=0))
    same = (report_to_json(degenerate, include_config=False)
            == report_to_json(baseline, include_config=False))
    print(f"criterion 1 (K1=1 degenerates to baseline): identical={same} "
          f"-> {'PASS' if same else 'FAIL'}")
    assert same


def test_criterion_02_exact_forecasts_run_without_failures(cells):
    fails = [cells("desk", "pessimistic", 0.0, 0.0, s)["fail"] for s in SEEDS]
    ok = all(f == 0.0 for f in fails)
    print(f"criterion 2 (oracle-pessimistic safety): failure_pct={fails} "
          f"-> {'PASS' if ok else 'FAIL'}")
    assert ok


def test_criterion_03_shaping_removes_memory_slack(cells):
    trace = generate(desk_workload(seed=0, n_applications=1000))
    fracs = []
    for app in trace.applications:
        for comp in app.all_components:
            s = trace.usage[comp.usage_profile_id].samples
            fracs.append(np.mean([x.memory for x in s])
                         / comp.reservation.memory)
            fracs.append(np.mean([x.cpus for x in s])
                         / comp.reservation.cpus)
    mean_frac = float(np.mean(fracs))
    shaped = cells("desk", "pessimistic", 0.0, 0.0, 0)["mem_slack"]
    static = cells("desk", "baseline", 0.05, 3.0, 0)["mem_slack"]
    ok = mean_frac <= 0.5 and shaped <= 0.05 and static >= 0.30
    print(f"criterion 3 (slack): usage/reservation={mean_frac:.3f}, "
          f"shaped slack={shaped:.4f} (<=0.05), "
          f"static slack={static:.3f} (>=0.30) -> {'PASS' if ok else 'FAIL'}")
    assert mean_frac <= 0.5
    assert shaped <= 0.05
    assert static >= 0.30


def test_criterion_04_turnaround_gain_under_queueing_pressure(cells):
    ratios, pressure = [], []
    for s in SEEDS:
        base = cells("desk", "baseline", 0.05, 3.0, s)
        pess = cells("desk", "pessimistic", 0.05, 0.0, s)
        ratios.append(base["mean_turnaround"] / pess["mean_turnaround"])
        pressure.append(base["median_queueing"] / base["median_runtime"])
    ok = all(r >= 5.0 for r in ratios) and all(p >= 2.0 for p in pressure)
    print(f"criterion 4 (turnaround gain): ratios="
          f"{[round(r, 1) for r in ratios]} (>=5), queueing/runtime="
          f"{[round(p, 1) for p in pressure]} (>=2) "
          f"-> {'PASS' if ok else 'FAIL'}")
    assert all(p >= 2.0 for p in pressure), "queueing-pressure precondition"
    assert all(r >= 5.0 for r in ratios)


def test_criterion_05_optimistic_fails_where_pessimistic_does_not(cells):
    opt = [cells("contended", "optimistic", 0.0, 0.0, s)["fail"]
           for s in SEEDS]
    pess = [cells("contended", "pessimistic", 0.0, 0.0, s)["fail"]
            for s in SEEDS]
    ok = all(o > 5.0 for o in opt) and all(p == 0.0 for p in pess)
    print(f"criterion 5 (policy ordering): optimistic%="
          f"{[round(o, 1) for o in opt]} (>5), pessimistic%={pess} (=0) "
          f"-> {'PASS' if ok else 'FAIL'}")
    assert all(o > 5.0 for o in opt)
    assert all(p == 0.0 for p in pess)


def test_criterion_06_uncertainty_buffer_reduces_failures(cells):
    with_k2 = [cells("desk", "pessimistic", 0.05, 3.0, s, n=300,
                     forecaster="exponential")["fail"] for s in SEEDS]
    without = [cells("desk", "pessimistic", 0.05, 0.0, s, n=300,
                     forecaster="exponential")["fail"] for s in SEEDS]
    mean_with, mean_without = np.mean(with_k2), np.mean(without)
    ok = mean_with <= 0.7 * mean_without
    print(f"criterion 6 (K2 benefit, GP): mean failure% {mean_without:.1f} "
          f"-> {mean_with:.1f} with K2=3 (need <=0.7x) "
          f"-> {'PASS' if ok else 'FAIL'}")
    assert ok


def test_criterion_07_gp_posterior_correctness():
    worst_rel, worst_var, worst_interp, min_eig_ratio = 0.0, 0.0, 0.0, 0.0
    rng = np.random.default_rng(0)
    for kernel in ("exponential", "rbf"):
        for n in (1, 5, 20, 50):
            X = rng.uniform(0, 1, size=(n, 4))
            y = np.sin(3 * X[:, 0]) + 0.05 * rng.standard_normal(n)
            q = rng.uniform(0, 1, size=4)
            sf2, ls, nv = 0.25, 0.5, 1e-2
            model = GPModel(h=3, n_max=n, kernel=kernel, signal_variance=sf2,
                            lengthscale=ls, noise_variance=nv, X=X, y=y)
            pred = gp_posterior(model, q)
            K = _kernel_matrix(kernel, X, X, sf2, ls) + nv * np.eye(n)
            kx = _kernel_matrix(kernel, q[None, :], X, sf2, ls)[0]
            Kinv = np.linalg.inv(K)
            ref_mean = float(kx @ Kinv @ y)
            ref_var = float(sf2 - kx @ Kinv @ kx)
            scale = max(abs(ref_mean), 1.0)
            worst_rel = max(worst_rel, abs(pred.mean - ref_mean) / scale)
            worst_var = max(worst_var, abs(pred.variance - ref_var)
                            / max(ref_var, 1.0))
            assert 0.0 <= pred.variance <= sf2 + 1e-8
            eig = np.linalg.eigvalsh(_kernel_matrix(kernel, X, X, sf2, ls))
            min_eig_ratio = min(min_eig_ratio,
                                float(eig.min()) / (sf2 * n))
            # Interpolation limit: near-zero noise reproduces the data
            # (lengthscale chosen to keep the Gram numerically regular).
            tiny = GPModel(h=3, n_max=n, kernel=kernel, signal_variance=1.0,
                           lengthscale=0.5, noise_variance=1e-10, X=X, y=y)
            for i in range(n):
                p = gp_posterior(tiny, X[i])
                worst_interp = max(worst_interp,
                                   abs(p.mean - y[i]) / max(abs(y[i]), 1.0))
    ok = worst_rel <= 1e-6 and worst_var <= 1e-6 \
        and worst_interp <= 1e-4 and min_eig_ratio >= -1e-8
    print(f"criterion 7 (GP correctness): posterior rel err={worst_rel:.2e} "
          f"(<=1e-6), var rel err={worst_var:.2e}, "
          f"interp err={worst_interp:.2e} (<=1e-4), "
          f"min eig/trace={min_eig_ratio:.2e} (>=-1e-8) "
          f"-> {'PASS' if ok else 'FAIL'}")
    assert worst_rel <= 1e-6
    assert worst_var <= 1e-6
    assert worst_interp <= 1e-4
    assert min_eig_ratio >= -1e-8


def _simulate_ar1(phi, n, sigma, rng):
    y = np.zeros(n)
    eps = rng.standard_normal(n) * sigma
    for t in range(1, n):
        y[t] = phi * y[t - 1] + eps[t]
    return y


def test_criterion_08_ar_model_correctness():
    estimates = []
    for seed in range(50):
        model = ari_fit(_simulate_ar1(0.6, 500, 0.2,
                                      np.random.default_rng(seed)))
        if model.p >= 1 and model.d == 0:
            estimates.append(model.coefficients[0])
    phi_err = abs(float(np.median(estimates)) - 0.6)

    hits = sum(
        1 for seed in range(100)
        if (m := ari_fit(_simulate_ar1(0.6, 100, 0.3,
                                       np.random.default_rng(seed)))).p == 1
        and m.d == 0
    )

    rng = np.random.default_rng(7)
    y = _simulate_ar1(0.7, 1300, 0.25, rng)
    covered = 0
    for t in range(300, 1300):
        model = ari_fit(y[t - 250:t])
        pred = ari_forecast(model, y[t - 250:t])
        half = 1.96 * math.sqrt(pred.variance)
        covered += (pred.mean - half <= y[t] <= pred.mean + half)
    coverage = covered / 10.0

    ok = phi_err <= 0.1 and hits >= 90 and 90.0 <= coverage <= 99.0
    print(f"criterion 8 (AR correctness): |median phi - 0.6|={phi_err:.3f} "
          f"(<=0.1), order hits={hits}/100 (>=90), "
          f"95% coverage={coverage:.1f}% (in [90,99]) "
          f"-> {'PASS' if ok else 'FAIL'}")
    assert phi_err <= 0.1
    assert hits >= 90
    assert 90.0 <= coverage <= 99.0


def _spiky_corpus(n_series, length, seed):
    """Noisy low base with abrupt one-tick bursts close to the reservation."""
    series, reservations = {}, {}
    rng = np.random.default_rng(seed)
    for i in range(n_series):
        r = float(rng.uniform(2048, 12288))
        y = rng.uniform(0.15, 0.3) * r + rng.normal(0, 0.02 * r, length)
        bursts = rng.random(length) < rng.uniform(0.05, 0.15)
        y[bursts] = rng.uniform(0.85, 1.0) * r
        series[i] = np.clip(y, 0.01 * r, r)
        reservations[i] = r
    return series, reservations


def _periodic_corpus(n_series, length, seed):
    from shapesim.workload import _pattern_fractions, _pattern_params
    series, reservations = {}, {}
    rng = np.random.default_rng(seed)
    for i in range(n_series):
        params = _pattern_params("periodic", rng)
        frac = _pattern_fractions("periodic", params, length, rng)
        r = float(rng.uniform(2048, 12288))
        series[i] = np.asarray(frac) * r
        reservations[i] = r
    return series, reservations


def _mean_err(rows, **match):
    sel = [r["mean"] for r in rows
           if all(r[k] == v for k, v in match.items())]
    return float(np.mean(sel))


def test_criterion_09_forecaster_comparison_directions():
    spiky, sres = _spiky_corpus(100, 120, 0)
    rows = evaluate_forecasters(spiky, sres, [
        ForecasterKind("gp", kernel="exponential", h=10, n_max=10),
        ForecasterKind("gp", kernel="rbf", h=10, n_max=10),
    ])
    exp_err = _mean_err(rows, kernel="exponential")
    rbf_err = _mean_err(rows, kernel="rbf")

    periodic, pres = _periodic_corpus(100, 200, 1)
    rows = evaluate_forecasters(periodic, pres, [
        ForecasterKind("gp", kernel="exponential", h=10, n_max=10),
        ForecasterKind("gp", kernel="exponential", h=40, n_max=40),
    ])
    h10, h40 = _mean_err(rows, h=10), _mean_err(rows, h=40)

    ok = exp_err <= rbf_err and h40 <= h10
    print(f"criterion 9 (forecaster directions): spiky exp={exp_err:.4f} <= "
          f"rbf={rbf_err:.4f}; periodic h=40 {h40:.4f} <= h=10 {h10:.4f} "
          f"-> {'PASS' if ok else 'FAIL'}")
    assert exp_err <= rbf_err
    assert h40 <= h10


def test_criterion_10_determinism_and_parallel_invariance(tmp_path):
    trace = generate(desk_workload(seed=0, n_applications=100))
    config = desk_sim("pessimistic", seed=0)
    repeat_same = (report_to_json(run(trace, config))
                   == report_to_json(run(trace, config)))

    trace_dir = str(tmp_path / "trace")
    write_trace(generate(desk_workload(seed=4, n_applications=25)), trace_dir)
    serial = sweep_to_csv(sweep(trace_dir, config, [0.0, 1.0], [0.0, 3.0],
                                jobs=1))
    parallel = sweep_to_csv(sweep(trace_dir, config, [0.0, 1.0], [0.0, 3.0],
                                  jobs=4))
    ok = repeat_same and serial == parallel
    print(f"criterion 10 (determinism): repeat identical={repeat_same}, "
          f"sweep jobs 1 vs 4 identical={serial == parallel} "
          f"-> {'PASS' if ok else 'FAIL'}")
    assert repeat_same
    assert serial == parallel


def test_criterion_11_work_conservation(cells):
    worst = 0.0
    checked = 0
    for args in [("desk", "pessimistic", 0.0, 0.0, 0),
                 ("desk", "pessimistic", 0.05, 0.0, 0),
                 ("desk", "baseline", 0.05, 3.0, 0),
                 ("contended", "optimistic", 0.0, 0.0, 0),
                 ("contended", "pessimistic", 0.0, 0.0, 0)]:
        for total, ledger, lost, completed in cells(*args)["conservation"]:
            if completed:
                worst = max(worst, abs(ledger - lost - total))
                checked += 1
    ok = checked > 0 and worst <= 1e-6
    print(f"criterion 11 (work conservation): {checked} completed apps, "
          f"max |accrued - lost - total|={worst:.2e} (<=1e-6) "
          f"-> {'PASS' if ok else 'FAIL'}")
    assert checked > 0
    assert worst <= 1e-6
