"""Core data model: resources, hosts, components, applications, cluster state.

All resource arithmetic is exact and checked: a subtraction that would go
negative raises instead of clamping, so "does not fit" is always explicit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum


class ResourceUnderflowError(Exception):
    """Checked resource subtraction went negative in some dimension."""

    def __init__(self, dimension: str, have: float, want: float) -> None:
        self.dimension = dimension
        self.have = have
        self.want = want
        super().__init__(
            f"resource underflow on {dimension}: have {have}, need {want}"
        )


@dataclass(frozen=True)
class ResourceVector:
    """A (cpus, memory) pair. cpus in fractional cores, memory in MB."""

    cpus: float
    memory: float

    def __post_init__(self) -> None:
        # Coerce numpy scalars so serialization stays plain-float.
        object.__setattr__(self, "cpus", float(self.cpus))
        object.__setattr__(self, "memory", float(self.memory))
        for name, v in (("cpus", self.cpus), ("memory", self.memory)):
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")
            if v < 0:
                raise ValueError(f"{name} must be non-negative, got {v}")

    def __add__(self, other: "ResourceVector") -> "ResourceVector":
        return ResourceVector(self.cpus + other.cpus, self.memory + other.memory)

    def sub_checked(self, other: "ResourceVector") -> "ResourceVector":
        """a - b component-wise; raises ResourceUnderflowError on any deficit."""
        if other.cpus > self.cpus:
            raise ResourceUnderflowError("cpus", self.cpus, other.cpus)
        if other.memory > self.memory:
            raise ResourceUnderflowError("memory", self.memory, other.memory)
        return ResourceVector(self.cpus - other.cpus, self.memory - other.memory)

    def fits_in(self, free: "ResourceVector") -> bool:
        """True iff self <= free in both dimensions."""
        return self.cpus <= free.cpus and self.memory <= free.memory

    def scale(self, k: float) -> "ResourceVector":
        return ResourceVector(self.cpus * k, self.memory * k)

    def clamp_to(self, upper: "ResourceVector") -> "ResourceVector":
        return ResourceVector(
            min(self.cpus, upper.cpus), min(self.memory, upper.memory)
        )

    @property
    def is_positive(self) -> bool:
        return self.cpus > 0 and self.memory > 0


RV_ZERO = ResourceVector(0.0, 0.0)


def rv_fits(request: ResourceVector, free: ResourceVector) -> bool:
    return request.fits_in(free)


def rv_sub_checked(a: ResourceVector, b: ResourceVector) -> ResourceVector:
    return a.sub_checked(b)


class ComponentKind(str, Enum):
    CORE = "core"
    ELASTIC = "elastic"


class ApplicationKind(str, Enum):
    RIGID = "rigid"
    ELASTIC = "elastic"


class ComponentStatus(str, Enum):
    PENDING = "pending"
    RUNNING = "running"
    PREEMPTED = "preempted"
    FINISHED = "finished"


class ApplicationStatus(str, Enum):
    QUEUED = "queued"
    RUNNING = "running"
    FINISHED = "finished"
    FAILED = "failed"


@dataclass
class Host:
    """A homogeneous machine with capacity and running tallies."""

    id: int
    capacity: ResourceVector
    allocated: ResourceVector = RV_ZERO
    used: ResourceVector = RV_ZERO

    @property
    def free(self) -> ResourceVector:
        """Capacity minus allocation, floored at zero per dimension.

        Under the optimistic policy allocation may exceed capacity, in which
        case there is no admissible free room.
        """
        return ResourceVector(
            max(0.0, self.capacity.cpus - self.allocated.cpus),
            max(0.0, self.capacity.memory - self.allocated.memory),
        )


@dataclass(frozen=True)
class ComponentSpec:
    id: int
    application_id: int
    kind: ComponentKind
    reservation: ResourceVector
    usage_profile_id: int

    def __post_init__(self) -> None:
        if not self.reservation.is_positive:
            raise ValueError(f"component {self.id}: reservation must be > 0")


@dataclass
class ComponentState:
    """Mutable runtime state of one component placement."""

    spec: ComponentSpec
    status: ComponentStatus = ComponentStatus.PENDING
    host_id: int | None = None
    start_time: int = -1
    allocated: ResourceVector = RV_ZERO
    used: ResourceVector = RV_ZERO
    # Work accrued during the current placement (reset on preemption).
    placement_work: float = 0.0
    # Bumped on every (re)placement / preemption; stale events check it.
    generation: int = 0

    def time_alive(self, now: int) -> int:
        if self.status is not ComponentStatus.RUNNING:
            return 0
        return now - self.start_time


@dataclass(frozen=True)
class ApplicationSpec:
    id: int
    kind: ApplicationKind
    core_components: tuple[ComponentSpec, ...]
    elastic_components: tuple[ComponentSpec, ...]
    total_work: float
    submission_time: int
    # Original submission time; stable across resubmissions, drives FIFO order.
    priority_key: int

    def __post_init__(self) -> None:
        if len(self.core_components) < 1:
            raise ValueError(f"app {self.id}: needs at least one core component")
        if self.kind is ApplicationKind.RIGID and self.elastic_components:
            raise ValueError(f"app {self.id}: rigid apps have no elastic components")
        if self.total_work <= 0:
            raise ValueError(f"app {self.id}: total_work must be > 0")

    @property
    def all_components(self) -> tuple[ComponentSpec, ...]:
        return self.core_components + self.elastic_components


@dataclass
class ApplicationState:
    spec: ApplicationSpec
    status: ApplicationStatus = ApplicationStatus.QUEUED
    accrued_work: float = 0.0
    # Cumulative per-component work over the whole run (never reset).
    work_ledger: dict[int, float] = field(default_factory=dict)
    lost_work: float = 0.0
    failure_count: int = 0
    first_submission: int = 0
    completion_time: int | None = None
    components: dict[int, ComponentState] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.components:
            self.components = {
                c.id: ComponentState(spec=c) for c in self.spec.all_components
            }
        if not self.work_ledger:
            self.work_ledger = {c.id: 0.0 for c in self.spec.all_components}

    def running_components(self) -> list[ComponentState]:
        return [
            c for c in self.components.values()
            if c.status is ComponentStatus.RUNNING
        ]


@dataclass
class ClusterState:
    hosts: list[Host]
    apps: dict[int, ApplicationState] = field(default_factory=dict)
    clock: int = 0

    def running_apps(self) -> list[ApplicationState]:
        return [
            a for a in self.apps.values()
            if a.status is ApplicationStatus.RUNNING
        ]

    def host_allocation_sums(self) -> dict[int, ResourceVector]:
        """Recompute per-host allocation from component states (reconciliation)."""
        sums = {h.id: RV_ZERO for h in self.hosts}
        for app in self.running_apps():
            for comp in app.running_components():
                sums[comp.host_id] = sums[comp.host_id] + comp.allocated
        return sums
