"""Synthetic workload generation and trace file I/O.

A trace is a directory holding `manifest.json` (config echo plus application
and component tables) and `usage.csv` (per-component ground-truth usage, one
row per 60 s tick). Generation is fully deterministic given the config seed;
each component's usage series is derived from an rng stream keyed by
(seed, component_id) so it does not depend on generation order.
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from dataclasses import dataclass, field, asdict

import numpy as np

from .domain import (
    ApplicationKind,
    ApplicationSpec,
    ComponentKind,
    ComponentSpec,
    ResourceVector,
)

TICK_SECONDS = 60

USAGE_PATTERNS = ("constant", "ramp", "periodic", "spiky")


class TraceFormatError(Exception):
    """Raised when a trace file is malformed; carries file/record context."""


@dataclass(frozen=True)
class DistSpec:
    """A named sampling distribution with keyword parameters.

    Supported kinds:
      gaussian(mu, sigma)            -- truncated below at `lo` (default 1.0)
      bimodal(burst_mu, burst_sigma, gap_mu, gap_sigma, burst_prob)
      uniform(lo, hi)
      loguniform(lo, hi)
      lognormal(mu, sigma)           -- optionally clipped to [lo, hi]
      uniform_int(lo, hi)            -- inclusive bounds
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        known = {"gaussian", "bimodal", "uniform", "loguniform",
                 "lognormal", "uniform_int"}
        if self.kind not in known:
            raise ValueError(f"unknown distribution kind {self.kind!r}")

    def sample(self, rng: np.random.Generator) -> float:
        p = self.params
        if self.kind == "gaussian":
            return max(p.get("lo", 1.0), rng.normal(p["mu"], p["sigma"]))
        if self.kind == "bimodal":
            if rng.random() < p["burst_prob"]:
                v = rng.normal(p["burst_mu"], p["burst_sigma"])
            else:
                v = rng.normal(p["gap_mu"], p["gap_sigma"])
            return max(p.get("lo", 1.0), v)
        if self.kind == "uniform":
            return rng.uniform(p["lo"], p["hi"])
        if self.kind == "loguniform":
            return math.exp(rng.uniform(math.log(p["lo"]), math.log(p["hi"])))
        if self.kind == "lognormal":
            v = rng.lognormal(p["mu"], p["sigma"])
            return min(max(v, p.get("lo", v)), p.get("hi", v))
        if self.kind == "uniform_int":
            return int(rng.integers(p["lo"], p["hi"] + 1))
        raise AssertionError(self.kind)

    def mean(self) -> float:
        """Configured mean, where it has a closed form (used by tests)."""
        p = self.params
        if self.kind == "gaussian":
            return p["mu"]
        if self.kind == "bimodal":
            return (p["burst_prob"] * p["burst_mu"]
                    + (1 - p["burst_prob"]) * p["gap_mu"])
        if self.kind == "uniform":
            return (p["lo"] + p["hi"]) / 2
        if self.kind == "uniform_int":
            return (p["lo"] + p["hi"]) / 2
        raise ValueError(f"no closed-form mean for {self.kind}")


@dataclass(frozen=True)
class WorkloadConfig:
    n_applications: int
    elastic_fraction: float
    inter_arrival: DistSpec
    core_count: DistSpec
    elastic_count: DistSpec
    cpus_range: tuple[float, float]
    memory_range_mb: tuple[float, float]
    runtime: DistSpec
    # Optional separate reservation ranges for core components (None means
    # "same as the shared ranges").  Coordinator-style cores are typically
    # much smaller than the workers.
    core_cpus_range: tuple[float, float] | None = None
    core_memory_range_mb: tuple[float, float] | None = None
    # Pattern name -> relative weight for the usage-profile mix.
    usage_mix: dict[str, float] = field(
        default_factory=lambda: {"constant": 1.0, "ramp": 1.0,
                                 "periodic": 1.0, "spiky": 1.0}
    )
    # Optional separate mix for core components.  Coordinator-style core
    # components typically have steady footprints while the worker (elastic)
    # components carry the variable load; None means "same mix as usage_mix".
    core_usage_mix: dict[str, float] | None = None
    # Optional fixed pattern for the cpu dimension of every component
    # (e.g. "constant"); None means cpu follows the same mix as memory.
    cpu_pattern: str | None = None
    # Optional quantization step for elastic components' memory usage, in MB
    # (heap-sized worker processes grow in whole-GB steps); None disables it.
    memory_quantum_mb: float | None = None
    # Multiplier on the baseline/steady part of every usage profile (levels,
    # ramp endpoints, periodic base/amplitude).  Values below 1.0 model
    # heavily over-reserved workloads; spike peaks are left at full height so
    # reservations stay peak-justified.
    usage_level_scale: float = 1.0
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.n_applications < 0:
            raise ValueError("n_applications must be >= 0")
        if not 0.0 <= self.elastic_fraction <= 1.0:
            raise ValueError("elastic_fraction must be in [0, 1]")
        if not 0 < self.cpus_range[0] <= self.cpus_range[1] <= 6:
            raise ValueError("cpus_range must satisfy 0 < lo <= hi <= 6")
        if not 0 < self.memory_range_mb[0] <= self.memory_range_mb[1]:
            raise ValueError("memory_range_mb must satisfy 0 < lo <= hi")
        if self.core_cpus_range is not None and not (
                0 < self.core_cpus_range[0] <= self.core_cpus_range[1] <= 6):
            raise ValueError("core_cpus_range must satisfy 0 < lo <= hi <= 6")
        if self.core_memory_range_mb is not None and not (
                0 < self.core_memory_range_mb[0]
                <= self.core_memory_range_mb[1]):
            raise ValueError("core_memory_range_mb must satisfy 0 < lo <= hi")
        for label, mix in (("usage_mix", self.usage_mix),
                           ("core_usage_mix", self.core_usage_mix)):
            if mix is None:
                continue
            for name, w in mix.items():
                if name not in USAGE_PATTERNS:
                    raise ValueError(f"unknown usage pattern {name!r}")
                if w < 0:
                    raise ValueError(f"{label}[{name!r}] must be >= 0")
            if sum(mix.values()) <= 0:
                raise ValueError(f"{label} weights must not all be zero")
        if self.cpu_pattern is not None and self.cpu_pattern not in USAGE_PATTERNS:
            raise ValueError(f"unknown usage pattern {self.cpu_pattern!r}")
        if self.memory_quantum_mb is not None and self.memory_quantum_mb <= 0:
            raise ValueError("memory_quantum_mb must be > 0")
        if not 0 < self.usage_level_scale <= 1.0:
            raise ValueError("usage_level_scale must be in (0, 1]")


@dataclass(frozen=True)
class UsageSeries:
    """Ground-truth per-tick usage for one component, 60 s resolution."""

    component_id: int
    samples: tuple[ResourceVector, ...]

    def __post_init__(self) -> None:
        if len(self.samples) < 1:
            raise ValueError("usage series must have at least one sample")

    def at(self, tick: int) -> ResourceVector:
        """Sample at a local tick index; holds the last value past the end."""
        return self.samples[min(tick, len(self.samples) - 1)]


@dataclass(frozen=True)
class WorkloadTrace:
    config: WorkloadConfig
    applications: tuple[ApplicationSpec, ...]
    usage: dict[int, UsageSeries]


def _pattern_params(pattern: str, rng: np.random.Generator,
                    level_scale: float = 1.0) -> dict:
    """Sample the free parameters of a usage pattern.

    All patterns keep per-tick growth modest (production usage series move
    slowly relative to a 60 s sampling grid); spikes ramp up over several
    ticks rather than jumping, so a one-step-ahead forecaster with perfect
    information always has a feasible next allocation.  `level_scale`
    multiplies the steady part of the profile; spike heights are exempt so
    the reservation stays peak-justified.
    """
    s = level_scale
    if pattern == "constant":
        return {"level": s * rng.uniform(0.2, 0.5)}
    if pattern == "ramp":
        return {"start": s * rng.uniform(0.15, 0.35),
                "end": s * rng.uniform(0.35, 0.6)}
    if pattern == "periodic":
        base = rng.uniform(0.3, 0.45)
        amp = rng.uniform(0.08, min(base - 0.05, 0.9 - base))
        return {"base": s * base, "amplitude": s * amp,
                "period": int(rng.integers(30, 61)),
                "phase": rng.uniform(0, 2 * math.pi)}
    if pattern == "spiky":
        return {"base": s * rng.uniform(0.12, 0.25),
                "noise": rng.uniform(0.005, 0.02),
                "spike_gap": int(rng.integers(30, 71)),
                "spike_height": rng.uniform(0.9, 1.0),
                "spike_ramp": int(rng.integers(3, 6)),
                "spike_hold": int(rng.integers(1, 3))}
    raise ValueError(f"unknown pattern {pattern!r}")


def _pattern_fractions(pattern: str, params: dict, length: int,
                       rng: np.random.Generator) -> np.ndarray:
    t = np.arange(length, dtype=float)
    if pattern == "constant":
        frac = np.full(length, params["level"])
    elif pattern == "ramp":
        if length == 1:
            frac = np.array([params["start"]])
        else:
            frac = np.linspace(params["start"], params["end"], length)
    elif pattern == "periodic":
        frac = params["base"] + params["amplitude"] * np.sin(
            2 * math.pi * t / params["period"] + params["phase"]
        )
    elif pattern == "spiky":
        frac = params["base"] + params["noise"] * rng.standard_normal(length)
        gap = params["spike_gap"]
        ramp = params["spike_ramp"]
        hold = params["spike_hold"]
        height = params["spike_height"]
        base = params["base"]
        first = int(rng.integers(1, gap + 1))
        for pos in range(first, length, gap):
            # Ramp up over `ramp` ticks, hold, then ramp back down.
            for k in range(ramp):
                if pos + k < length:
                    frac[pos + k] = base + (height - base) * (k + 1) / ramp
            for k in range(hold):
                if pos + ramp + k < length:
                    frac[pos + ramp + k] = height
            for k in range(ramp):
                i = pos + ramp + hold + k
                if i < length:
                    frac[i] = height - (height - base) * (k + 1) / ramp
        # Guarantee the reservation is peak-justified even on short series.
        if frac.max() < 0.9:
            frac[int(rng.integers(0, length))] = height
    else:
        raise ValueError(f"unknown pattern {pattern!r}")
    return np.clip(frac, 0.01, 1.0)


def synth_usage(spec: ComponentSpec, pattern: str, rng: np.random.Generator,
                length: int, params: dict | None = None,
                cpu_pattern: str | None = None,
                memory_quantum_mb: float | None = None,
                usage_level_scale: float = 1.0) -> UsageSeries:
    """Generate a ground-truth usage series for one component.

    cpu and memory share the pattern kind but draw independent parameters,
    unless explicit `params` are given (then both dimensions use them).
    `cpu_pattern` overrides the pattern kind for the cpu dimension only;
    memory-intensive workloads often pin a steady worker-pool cpu share
    while memory tracks the data actually resident.  `memory_quantum_mb`
    rounds memory usage up to whole allocation-unit steps, capped at the
    reservation.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    if params is not None:
        cpu_frac = _pattern_fractions(pattern, params, length, rng)
        mem_frac = _pattern_fractions(pattern, params, length, rng)
    else:
        cpu_kind = cpu_pattern if cpu_pattern is not None else pattern
        cpu_frac = _pattern_fractions(
            cpu_kind, _pattern_params(cpu_kind, rng, usage_level_scale),
            length, rng)
        mem_frac = _pattern_fractions(
            pattern, _pattern_params(pattern, rng, usage_level_scale),
            length, rng)
    res = spec.reservation
    mem = mem_frac * res.memory
    if memory_quantum_mb is not None:
        q = memory_quantum_mb
        mem = np.minimum(np.ceil(mem / q) * q, res.memory)
    samples = tuple(
        ResourceVector(c * res.cpus, m)
        for c, m in zip(cpu_frac, mem)
    )
    return UsageSeries(component_id=spec.id, samples=samples)


def _component_rng(seed: int, component_id: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, component_id]))


def generate(config: WorkloadConfig) -> WorkloadTrace:
    """Generate a deterministic trace from the config's distributions."""
    rng = np.random.default_rng(np.random.SeedSequence([config.rng_seed]))

    def normalized(mix: dict[str, float]) -> tuple[list[str], np.ndarray]:
        names = sorted(mix)
        w = np.array([mix[p] for p in names], dtype=float)
        return names, w / w.sum()

    patterns, weights = normalized(config.usage_mix)
    core_mix = config.core_usage_mix or config.usage_mix
    core_patterns, core_weights = normalized(core_mix)

    apps: list[ApplicationSpec] = []
    usage: dict[int, UsageSeries] = {}
    next_component_id = 0
    arrival = 0

    for app_id in range(config.n_applications):
        gap = max(1, int(round(config.inter_arrival.sample(rng))))
        arrival += gap
        elastic = rng.random() < config.elastic_fraction
        kind = ApplicationKind.ELASTIC if elastic else ApplicationKind.RIGID
        n_core = max(1, int(config.core_count.sample(rng)))
        n_elastic = max(1, int(config.elastic_count.sample(rng))) if elastic else 0
        runtime = max(TICK_SECONDS, int(round(config.runtime.sample(rng))))
        n_ticks = max(1, math.ceil(runtime / TICK_SECONDS))

        def make_component(comp_kind: ComponentKind) -> ComponentSpec:
            nonlocal next_component_id
            cid = next_component_id
            next_component_id += 1
            if comp_kind is ComponentKind.CORE:
                cpus_range = config.core_cpus_range or config.cpus_range
                mem_range = (config.core_memory_range_mb
                             or config.memory_range_mb)
            else:
                cpus_range = config.cpus_range
                mem_range = config.memory_range_mb
            mem = rng.uniform(*mem_range)
            if (config.memory_quantum_mb is not None
                    and comp_kind is ComponentKind.ELASTIC):
                mem = math.ceil(mem / config.memory_quantum_mb) \
                    * config.memory_quantum_mb
            reservation = ResourceVector(rng.uniform(*cpus_range), mem)
            return ComponentSpec(
                id=cid, application_id=app_id, kind=comp_kind,
                reservation=reservation, usage_profile_id=cid,
            )

        core = tuple(make_component(ComponentKind.CORE) for _ in range(n_core))
        elas = tuple(make_component(ComponentKind.ELASTIC) for _ in range(n_elastic))

        for comp in core + elas:
            if comp.kind is ComponentKind.CORE:
                pattern = core_patterns[rng.choice(len(core_patterns),
                                                   p=core_weights)]
            else:
                pattern = patterns[rng.choice(len(patterns), p=weights)]
            series_rng = _component_rng(config.rng_seed, comp.id)
            quantum = (config.memory_quantum_mb
                       if comp.kind is ComponentKind.ELASTIC else None)
            usage[comp.id] = synth_usage(
                comp, pattern, series_rng, n_ticks,
                cpu_pattern=config.cpu_pattern,
                memory_quantum_mb=quantum,
                usage_level_scale=config.usage_level_scale)

        n_comps = n_core + n_elastic
        apps.append(ApplicationSpec(
            id=app_id, kind=kind, core_components=core, elastic_components=elas,
            total_work=float(runtime * n_comps),
            submission_time=arrival, priority_key=arrival,
        ))

    return WorkloadTrace(config=config, applications=tuple(apps), usage=usage)


# --- serialization -----------------------------------------------------------

def _config_to_dict(config: WorkloadConfig) -> dict:
    d = asdict(config)
    d["cpus_range"] = list(config.cpus_range)
    d["memory_range_mb"] = list(config.memory_range_mb)
    return d


def config_from_dict(d: dict) -> WorkloadConfig:
    d = dict(d)
    known = {f for f in WorkloadConfig.__dataclass_fields__}
    unknown = set(d) - known
    if unknown:
        raise TraceFormatError(f"unknown workload config keys: {sorted(unknown)}")
    for key in ("inter_arrival", "core_count", "elastic_count", "runtime"):
        spec = d[key]
        if isinstance(spec, dict):
            extra = set(spec) - {"kind", "params"}
            if extra:
                raise TraceFormatError(f"unknown keys in {key}: {sorted(extra)}")
            d[key] = DistSpec(kind=spec["kind"], params=dict(spec["params"]))
    d["cpus_range"] = tuple(d["cpus_range"])
    d["memory_range_mb"] = tuple(d["memory_range_mb"])
    for key in ("core_cpus_range", "core_memory_range_mb"):
        if d.get(key) is not None:
            d[key] = tuple(d[key])
    return WorkloadConfig(**d)


def _app_to_dict(app: ApplicationSpec) -> dict:
    def comp(c: ComponentSpec) -> dict:
        return {"id": c.id, "kind": c.kind.value,
                "cpus": c.reservation.cpus, "memory_mb": c.reservation.memory,
                "usage_profile_id": c.usage_profile_id}

    return {
        "id": app.id, "kind": app.kind.value,
        "core_components": [comp(c) for c in app.core_components],
        "elastic_components": [comp(c) for c in app.elastic_components],
        "total_work": app.total_work,
        "submission_time": app.submission_time,
        "priority_key": app.priority_key,
    }


def _app_from_dict(d: dict) -> ApplicationSpec:
    def comp(cd: dict, kind: ComponentKind) -> ComponentSpec:
        return ComponentSpec(
            id=cd["id"], application_id=d["id"], kind=kind,
            reservation=ResourceVector(cd["cpus"], cd["memory_mb"]),
            usage_profile_id=cd["usage_profile_id"],
        )

    return ApplicationSpec(
        id=d["id"], kind=ApplicationKind(d["kind"]),
        core_components=tuple(comp(c, ComponentKind.CORE)
                              for c in d["core_components"]),
        elastic_components=tuple(comp(c, ComponentKind.ELASTIC)
                                 for c in d["elastic_components"]),
        total_work=d["total_work"],
        submission_time=d["submission_time"],
        priority_key=d["priority_key"],
    )


def write_trace(trace: WorkloadTrace, path: str) -> None:
    """Write a trace directory atomically (build in temp dir, then rename)."""
    parent = os.path.dirname(os.path.abspath(path)) or "."
    tmpdir = tempfile.mkdtemp(dir=parent, prefix=".trace-tmp-")
    try:
        manifest = {
            "config": _config_to_dict(trace.config),
            "applications": [_app_to_dict(a) for a in trace.applications],
        }
        with open(os.path.join(tmpdir, "manifest.json"), "w") as fh:
            json.dump(manifest, fh, sort_keys=True, separators=(",", ":"))
        with open(os.path.join(tmpdir, "usage.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["component_id", "tick", "cpus", "mem_mb"])
            for cid in sorted(trace.usage):
                for tick, rv in enumerate(trace.usage[cid].samples):
                    writer.writerow([cid, tick, repr(rv.cpus), repr(rv.memory)])
        if os.path.isdir(path):
            # Replace an existing trace dir in one final rename step.
            stale = path + ".stale"
            os.rename(path, stale)
            os.rename(tmpdir, path)
            import shutil
            shutil.rmtree(stale)
        else:
            os.rename(tmpdir, path)
    except Exception:
        import shutil
        shutil.rmtree(tmpdir, ignore_errors=True)
        raise


def load_trace(path: str) -> WorkloadTrace:
    manifest_path = os.path.join(path, "manifest.json")
    usage_path = os.path.join(path, "usage.csv")
    try:
        with open(manifest_path) as fh:
            manifest = json.load(fh)
    except FileNotFoundError:
        raise TraceFormatError(f"missing manifest: {manifest_path}")
    except json.JSONDecodeError as exc:
        raise TraceFormatError(f"malformed manifest {manifest_path}: {exc}")

    config = config_from_dict(manifest["config"])
    apps = tuple(_app_from_dict(a) for a in manifest["applications"])

    samples: dict[int, list[tuple[int, ResourceVector]]] = {}
    try:
        with open(usage_path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["component_id", "tick", "cpus", "mem_mb"]:
                raise TraceFormatError(f"bad usage.csv header: {header}")
            for lineno, row in enumerate(reader, start=2):
                if len(row) != 4:
                    raise TraceFormatError(
                        f"usage.csv line {lineno}: expected 4 fields, got {len(row)}"
                    )
                cid, tick = int(row[0]), int(row[1])
                rv = ResourceVector(float(row[2]), float(row[3]))
                samples.setdefault(cid, []).append((tick, rv))
    except FileNotFoundError:
        raise TraceFormatError(f"missing usage file: {usage_path}")
    except ValueError as exc:
        raise TraceFormatError(f"malformed usage.csv: {exc}")

    usage: dict[int, UsageSeries] = {}
    for cid, rows in samples.items():
        rows.sort(key=lambda r: r[0])
        ticks = [t for t, _ in rows]
        if ticks != list(range(len(ticks))):
            raise TraceFormatError(f"component {cid}: non-contiguous ticks")
        usage[cid] = UsageSeries(component_id=cid,
                                 samples=tuple(rv for _, rv in rows))

    for app in apps:
        for comp in app.all_components:
            if comp.id not in usage:
                raise TraceFormatError(f"component {comp.id}: no usage series")

    return WorkloadTrace(config=config, applications=apps, usage=usage)
