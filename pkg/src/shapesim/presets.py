"""Desk-scale experiment presets: 20 hosts x (32 cores, 128 GB), 1000 apps.

The arrival process is tuned so a reservation-centric baseline run builds a
substantial queue (median queueing well above median runtime), which is the
regime where shaping pays off. Runtimes span 10 minutes to 4 hours.
"""

from __future__ import annotations

from dataclasses import replace

from .domain import ResourceVector
from .engine import SimConfig
from .forecast import ForecasterKind
from .shaper import BufferParams
from .workload import DistSpec, WorkloadConfig

DESK_HOST_COUNT = 20
DESK_HOST_CAPACITY = ResourceVector(32.0, 131072.0)


def desk_workload(seed: int = 0, n_applications: int = 1000) -> WorkloadConfig:
    return WorkloadConfig(
        n_applications=n_applications,
        # Framework-style jobs: one small coordinator plus elastic workers.
        elastic_fraction=1.0,
        inter_arrival=DistSpec("bimodal", {
            "burst_mu": 20.0, "burst_sigma": 6.0,
            "gap_mu": 160.0, "gap_sigma": 50.0, "burst_prob": 0.7,
        }),
        core_count=DistSpec("uniform_int", {"lo": 2, "hi": 4}),
        elastic_count=DistSpec("uniform_int", {"lo": 2, "hi": 6}),
        cpus_range=(1.0, 6.0),
        memory_range_mb=(2048.0, 12288.0),
        runtime=DistSpec("loguniform", {"lo": 600.0, "hi": 14400.0}),
        core_cpus_range=(4.0, 6.0),
        core_memory_range_mb=(512.0, 2048.0),
        usage_mix={"constant": 1.0, "ramp": 0.5, "periodic": 1.0, "spiky": 0.5},
        # Coordinator components keep steady footprints; the variable load
        # lives in the workers.
        core_usage_mix={"constant": 1.0},
        # Data-resident memory fluctuates; the worker-pool cpu share is pinned.
        cpu_pattern="constant",
        # Heavily over-reserved: steady usage well below reservations, which
        # is what makes shaping (rather than reservations) the right basis
        # for admission.
        usage_level_scale=0.55,
        rng_seed=seed,
    )


def desk_workload_contended(seed: int = 0,
                            n_applications: int = 1000) -> WorkloadConfig:
    """Memory-bound variant: admission packs host memory, so usage crests
    genuinely overload hosts unless the shaper sheds elastic components.

    Worker memory moves in 800 MB allocation-unit steps. 800 does not divide
    the 131072 MB host capacity, so quantized worker demands can never sum to
    exactly a full host: at least 672 MB stays free, which is orders of
    magnitude more than the (tiny, steady) coordinator footprints need. That
    keeps strict-feasibility replanning from ever having to evict a
    coordinator, while memory crests still overload optimistically-packed
    hosts.
    """
    base = desk_workload(seed=seed, n_applications=n_applications)
    return replace(
        base,
        inter_arrival=DistSpec("bimodal", {
            "burst_mu": 15.0, "burst_sigma": 5.0,
            "gap_mu": 150.0, "gap_sigma": 45.0, "burst_prob": 0.7,
        }),
        core_count=DistSpec("uniform_int", {"lo": 1, "hi": 1}),
        cpus_range=(0.5, 2.0),
        memory_range_mb=(8000.0, 16000.0),
        core_cpus_range=(2.6, 3.0),
        core_memory_range_mb=(8.0, 16.0),
        usage_mix={"constant": 2.0, "spiky": 1.0},
        memory_quantum_mb=800.0,
        usage_level_scale=1.0,
    )


def desk_sim(policy: str, forecaster: ForecasterKind | None = None,
             k1: float = 0.05, k2: float = 3.0,
             grace_period: int | None = None, seed: int = 0) -> SimConfig:
    if forecaster is None:
        forecaster = ForecasterKind("oracle")
    if grace_period is None:
        # The grace period exists to cover forecaster warm-up; the oracle
        # needs none.
        grace_period = 0 if forecaster.tag == "oracle" else 600
    return SimConfig(
        policy=policy,
        forecaster=forecaster,
        buffer=BufferParams(k1=k1, k2=k2),
        grace_period=grace_period,
        host_count=DESK_HOST_COUNT,
        host_capacity=DESK_HOST_CAPACITY,
        rng_seed=seed,
    )


def with_buffer(config: SimConfig, k1: float, k2: float) -> SimConfig:
    return replace(config, buffer=BufferParams(k1=k1, k2=k2))
