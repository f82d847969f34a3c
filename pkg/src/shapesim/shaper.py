"""Resource shaping: safe-guard buffer and the preemption policies.

The pessimistic planner walks applications in scheduling order on working
copies of per-host free resources: an application whose core components do
not all fit is fully preempted (its tentative subtractions roll back);
surviving applications then place elastic components in descending
time-alive order, preempting the ones that no longer fit. The optimistic
planner grants every demand unchecked and leaves overload to the engine's
reactive kill path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .domain import (
    ApplicationStatus,
    ClusterState,
    ComponentStatus,
    ResourceVector,
)
from .forecast import PredictiveDistribution


@dataclass(frozen=True)
class BufferParams:
    k1: float   # fraction of reservation, static term
    k2: float   # sigma multiplier, uncertainty term

    def __post_init__(self) -> None:
        if not 0.0 <= self.k1 <= 1.0:
            raise ValueError(f"k1 must be in [0, 1], got {self.k1}")
        if self.k2 < 0:
            raise ValueError(f"k2 must be >= 0, got {self.k2}")


@dataclass
class ShapingPlan:
    new_allocations: dict[int, ResourceVector] = field(default_factory=dict)
    preempted_apps: list[int] = field(default_factory=list)       # K
    preempted_elastic: list[int] = field(default_factory=list)    # K_E


def compute_buffer(reservation: ResourceVector,
                   prediction_cpu: PredictiveDistribution,
                   prediction_mem: PredictiveDistribution,
                   params: BufferParams) -> tuple[float, float]:
    """Per-dimension buffer: beta = K1 * R + K2 * sqrt(variance)."""
    beta_cpu = params.k1 * reservation.cpus + params.k2 * math.sqrt(
        prediction_cpu.variance
    )
    beta_mem = params.k1 * reservation.memory + params.k2 * math.sqrt(
        prediction_mem.variance
    )
    return beta_cpu, beta_mem


def shaped_demand(reservation: ResourceVector,
                  prediction_cpu: PredictiveDistribution,
                  prediction_mem: PredictiveDistribution,
                  params: BufferParams) -> ResourceVector:
    """Predicted demand plus buffer, clamped into [K1 * R, R] per dimension."""
    beta_cpu, beta_mem = compute_buffer(reservation, prediction_cpu,
                                        prediction_mem, params)
    cpu = min(max(prediction_cpu.mean + beta_cpu,
                  params.k1 * reservation.cpus, 0.0), reservation.cpus)
    mem = min(max(prediction_mem.mean + beta_mem,
                  params.k1 * reservation.memory, 0.0), reservation.memory)
    return ResourceVector(cpu, mem)


def plan_pessimistic(state: ClusterState,
                     demands: dict[int, ResourceVector],
                     scheduling_order: list[int]) -> ShapingPlan:
    """Strict-feasibility reallocation over running applications.

    `demands` maps running component id -> demanded allocation (buffer
    already included). `scheduling_order` lists running application ids in
    scheduler priority order (FIFO by original submission time).
    """
    cpus_free = {h.id: h.capacity.cpus for h in state.hosts}
    mem_free = {h.id: h.capacity.memory for h in state.hosts}
    plan = ShapingPlan()

    for app_id in scheduling_order:
        app = state.apps[app_id]
        if app.status is not ApplicationStatus.RUNNING:
            continue
        running = {
            c.spec.id: c for c in app.components.values()
            if c.status is ComponentStatus.RUNNING
        }
        core = [running[cid] for cid in sorted(running)
                if running[cid].spec.kind.value == "core"]
        elastic = [running[cid] for cid in sorted(running)
                   if running[cid].spec.kind.value == "elastic"]

        # Tentative subtraction of core demands on working copies.
        cpus = dict(cpus_free)
        mem = dict(mem_free)
        remove = False
        for comp in core:
            d = demands[comp.spec.id]
            cpus[comp.host_id] -= d.cpus
            if cpus[comp.host_id] < 0:
                remove = True
                break
            mem[comp.host_id] -= d.memory
            if mem[comp.host_id] < 0:
                remove = True
                break

        if remove:
            plan.preempted_apps.append(app_id)
            continue

        cpus_free = cpus
        mem_free = mem
        for comp in core:
            plan.new_allocations[comp.spec.id] = demands[comp.spec.id]

        # Oldest elastic components get placed first; ties break on lower id.
        now = state.clock
        elastic.sort(key=lambda c: (-c.time_alive(now), c.spec.id))
        for comp in elastic:
            d = demands[comp.spec.id]
            c_left = cpus_free[comp.host_id] - d.cpus
            m_left = mem_free[comp.host_id] - d.memory
            if c_left < 0 or m_left < 0:
                plan.preempted_elastic.append(comp.spec.id)
            else:
                cpus_free[comp.host_id] = c_left
                mem_free[comp.host_id] = m_left
                plan.new_allocations[comp.spec.id] = d

    return plan


def resolve_optimistic(state: ClusterState,
                       demands: dict[int, ResourceVector],
                       scheduling_order: list[int]) -> ShapingPlan:
    """Grant every demand with no feasibility check; never preempts."""
    plan = ShapingPlan()
    for app_id in scheduling_order:
        app = state.apps[app_id]
        if app.status is not ApplicationStatus.RUNNING:
            continue
        for cid in sorted(
            c.spec.id for c in app.components.values()
            if c.status is ComponentStatus.RUNNING
        ):
            plan.new_allocations[cid] = demands[cid]
    return plan
