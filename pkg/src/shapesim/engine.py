"""Deterministic discrete-event simulation of the shaped cluster.

Event processing is totally ordered by (time, kind priority, sequence).
Kind priorities guarantee that, at a shared timestamp, the monitor records
usage before the shaper consumes it, and shaping outcomes land before
resubmissions and new submissions are scheduled.

Work model: every running component contributes one work-unit per second;
an application completes when its accrued work reaches total_work. Killing
elastic components therefore stretches runtime; a full preemption restarts
the application from zero accrued work.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from enum import IntEnum

from .domain import (
    ApplicationKind,
    ApplicationState,
    ApplicationStatus,
    ClusterState,
    ComponentKind,
    ComponentState,
    ComponentStatus,
    Host,
    ResourceVector,
    RV_ZERO,
)
from .forecast import (
    Forecaster,
    ForecasterKind,
    PredictiveDistribution,
    batch_predict,
)
from .shaper import BufferParams, plan_pessimistic, resolve_optimistic, shaped_demand
from .workload import TICK_SECONDS, WorkloadTrace

RESUBMIT_CAP = 10
WORK_EPS = 1e-9


class EventKind(IntEnum):
    # Numeric value is the tie-break priority at equal times.
    MONITOR_TICK = 0
    SHAPE_TICK = 1
    COMPONENT_FINISH = 2
    APP_COMPLETE = 3
    FAILURE = 4
    RESUBMIT = 5
    SUBMIT = 6


@dataclass(frozen=True)
class SimConfig:
    policy: str                      # baseline | optimistic | pessimistic
    forecaster: ForecasterKind = ForecasterKind("oracle")
    buffer: BufferParams = BufferParams(0.05, 3.0)
    monitor_interval: int = TICK_SECONDS
    grace_period: int = 600
    max_failures_before_exempt: int = 3
    elastic_loss_fraction: float = 1.0
    placement: str = "first_fit"
    host_count: int = 20
    host_capacity: ResourceVector = ResourceVector(32.0, 131072.0)
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.policy not in ("baseline", "optimistic", "pessimistic"):
            raise ValueError(f"unknown policy {self.policy!r}")
        if self.monitor_interval <= 0 or self.grace_period < 0:
            raise ValueError("intervals must be positive")
        if not 0.0 <= self.elastic_loss_fraction <= 1.0:
            raise ValueError("elastic_loss_fraction must be in [0, 1]")
        if self.placement != "first_fit":
            raise ValueError(f"unknown placement {self.placement!r}")
        if self.host_count < 1:
            raise ValueError("host_count must be >= 1")


@dataclass
class AppRecord:
    id: int
    kind: str
    first_submission: int
    completion: int | None
    turnaround: int | None
    failure_count: int
    lost_work: float
    permanently_failed: bool
    alloc_cpu_ticks: float
    used_cpu_ticks: float
    alloc_mem_ticks: float
    used_mem_ticks: float
    total_work: float
    accrued_work: float
    ledger_total: float


@dataclass
class TickSample:
    t: int
    alloc_cpus: float
    alloc_mem: float
    used_cpus: float
    used_mem: float


@dataclass
class SimulationReport:
    config: dict
    apps: list[AppRecord]
    ticks: list[TickSample]
    aggregates: dict


@dataclass
class _Runtime:
    """Per-application bookkeeping that is not part of the domain state."""

    rate: int = 0                  # running components, work-units per second
    last_accrual: float = 0.0
    version: int = 0               # invalidates stale completion events
    alloc_cpu_ticks: float = 0.0
    used_cpu_ticks: float = 0.0
    alloc_mem_ticks: float = 0.0
    used_mem_ticks: float = 0.0
    permanently_failed: bool = False


class Simulation:
    def __init__(self, trace: WorkloadTrace, config: SimConfig) -> None:
        self.trace = trace
        self.config = config
        self.state = ClusterState(
            hosts=[Host(id=i, capacity=config.host_capacity)
                   for i in range(config.host_count)]
        )
        self.rt: dict[int, _Runtime] = {}
        self.queue: list[tuple[int, int]] = []   # (priority_key, app_id)
        self.events: list[tuple[int, int, int, tuple]] = []
        self._seq = 0
        self.ticks: list[TickSample] = []
        # (component_id, resource) -> Forecaster; recreated on (re)placement.
        self.forecasters: dict[tuple[int, str], Forecaster] = {}
        self._uses_stat_forecast = (
            config.policy != "baseline" and config.forecaster.tag != "oracle"
        )
        self._comp_app: dict[int, int] = {
            c.id: a.id for a in trace.applications for c in a.all_components
        }

    # -- event plumbing --------------------------------------------------------

    def _push(self, time: int, kind: EventKind, payload: tuple) -> None:
        self._seq += 1
        heapq.heappush(self.events, (time, int(kind), self._seq, payload))

    def run(self) -> SimulationReport:
        for app in self.trace.applications:
            st = ApplicationState(spec=app, first_submission=app.submission_time)
            self.state.apps[app.id] = st
            self.rt[app.id] = _Runtime()
            self._push(app.submission_time, EventKind.SUBMIT, (app.id,))
        if self.trace.applications:
            first_tick = TICK_SECONDS
            self._push(first_tick, EventKind.MONITOR_TICK, ())
            if self.config.policy != "baseline":
                self._push(first_tick, EventKind.SHAPE_TICK, ())

        while self.events:
            time, kind, _, payload = heapq.heappop(self.events)
            self.state.clock = time
            kind = EventKind(kind)
            if kind is EventKind.SUBMIT:
                self._on_submit(time, payload[0])
            elif kind is EventKind.MONITOR_TICK:
                self._on_monitor(time)
            elif kind is EventKind.SHAPE_TICK:
                self._on_shape(time)
            elif kind is EventKind.FAILURE:
                self._on_failure(time, *payload)
            elif kind is EventKind.RESUBMIT:
                self._on_resubmit(time, payload[0])
            elif kind is EventKind.APP_COMPLETE:
                self._on_complete(time, *payload)

        return self._build_report()

    def _all_settled(self) -> bool:
        return all(
            a.status is ApplicationStatus.FINISHED
            or self.rt[a.spec.id].permanently_failed
            for a in self.state.apps.values()
        )

    # -- work accrual ----------------------------------------------------------

    def _advance(self, app: ApplicationState, now: float) -> None:
        rt = self.rt[app.spec.id]
        dt = now - rt.last_accrual
        if dt <= 0:
            rt.last_accrual = max(rt.last_accrual, now)
            return
        if rt.rate > 0:
            app.accrued_work += dt * rt.rate
            for comp in app.components.values():
                if comp.status is ComponentStatus.RUNNING:
                    app.work_ledger[comp.spec.id] += dt
                    comp.placement_work += dt
        rt.last_accrual = now

    def _reschedule_completion(self, app: ApplicationState, now: float) -> None:
        rt = self.rt[app.spec.id]
        rt.version += 1
        if app.status is not ApplicationStatus.RUNNING or rt.rate <= 0:
            return
        remaining = app.spec.total_work - app.accrued_work
        t_exact = rt.last_accrual + remaining / rt.rate
        t_event = max(int(math.ceil(t_exact - WORK_EPS)), int(math.ceil(now)))
        self._push(t_event, EventKind.APP_COMPLETE, (app.spec.id, rt.version))

    # -- placement -------------------------------------------------------------

    def _place_component(self, comp: ComponentState, host: Host, now: int) -> None:
        reservation = comp.spec.reservation
        comp.status = ComponentStatus.RUNNING
        comp.host_id = host.id
        comp.start_time = now
        comp.used = RV_ZERO
        comp.placement_work = 0.0
        comp.generation += 1
        if self._uses_stat_forecast:
            for res in ("cpus", "memory"):
                reserved = getattr(reservation, res)
                self.forecasters[(comp.spec.id, res)] = Forecaster(
                    self.config.forecaster, reserved
                )
        allocation = reservation
        if self.config.policy != "baseline" and self.config.grace_period == 0:
            # No grace period: shape the starting allocation immediately
            # instead of holding full reservation until the next shape tick.
            # (A warm-up forecaster predicts full reservation, so this only
            # bites when predictions are available at placement.)
            if self.config.forecaster.tag == "oracle":
                # Cover the sample the next monitor tick will observe: index 0
                # when placed mid-interval, index 1 when placed exactly on a
                # tick boundary (the next monitor is then a full tick away).
                mi = self.config.monitor_interval
                idx = ((now // mi + 1) * mi - now) // TICK_SECONDS
                first = self.trace.usage[comp.spec.usage_profile_id].at(idx)
                pc = PredictiveDistribution(first.cpus, 0.0)
                pm = PredictiveDistribution(first.memory, 0.0)
            else:
                pc = self.forecasters[(comp.spec.id, "cpus")].predict()
                pm = self.forecasters[(comp.spec.id, "memory")].predict()
            allocation = shaped_demand(reservation, pc, pm, self.config.buffer)
        host.allocated = host.allocated + allocation
        comp.allocated = allocation

    def _release_component(self, comp: ComponentState,
                           status: ComponentStatus) -> None:
        if comp.status is ComponentStatus.RUNNING:
            host = self.state.hosts[comp.host_id]
            host.allocated = ResourceVector(
                max(0.0, host.allocated.cpus - comp.allocated.cpus),
                max(0.0, host.allocated.memory - comp.allocated.memory),
            )
        comp.status = status
        comp.host_id = None
        comp.allocated = RV_ZERO
        comp.used = RV_ZERO
        comp.placement_work = 0.0
        comp.generation += 1
        self.forecasters.pop((comp.spec.id, "cpus"), None)
        self.forecasters.pop((comp.spec.id, "memory"), None)

    def _try_place_all(self, comps: list[ComponentState], now: int) -> bool:
        """First-fit all-or-nothing placement at full reservation."""
        free = {h.id: h.free for h in self.state.hosts}
        chosen: list[tuple[ComponentState, int]] = []
        for comp in comps:
            placed = False
            for host in self.state.hosts:
                if comp.spec.reservation.fits_in(free[host.id]):
                    free[host.id] = free[host.id].sub_checked(comp.spec.reservation)
                    chosen.append((comp, host.id))
                    placed = True
                    break
            if not placed:
                return False
        for comp, host_id in chosen:
            self._place_component(comp, self.state.hosts[host_id], now)
        return True

    def _try_place_one(self, comp: ComponentState, now: int) -> bool:
        for host in self.state.hosts:
            if comp.spec.reservation.fits_in(host.free):
                self._place_component(comp, host, now)
                return True
        return False

    def _schedule_pending(self, now: int) -> None:
        """Strict FIFO head-of-line admission, then dormant-elastic retry."""
        while self.queue:
            _, app_id = self.queue[0]
            app = self.state.apps[app_id]
            core = [app.components[c.id] for c in app.spec.core_components]
            if not self._try_place_all(core, now):
                break
            heapq.heappop(self.queue)
            for cspec in app.spec.elastic_components:
                self._try_place_one(app.components[cspec.id], now)
            app.status = ApplicationStatus.RUNNING
            rt = self.rt[app_id]
            self._advance(app, now)
            rt.rate = len(app.running_components())
            self._reschedule_completion(app, now)

        for app in sorted(self.state.running_apps(),
                          key=lambda a: (a.spec.priority_key, a.spec.id)):
            dormant = [
                app.components[c.id] for c in app.spec.elastic_components
                if app.components[c.id].status is not ComponentStatus.RUNNING
            ]
            if not dormant:
                continue
            # Settle accrual at the old rate before any new component
            # starts, so the ledger never credits pre-placement time.
            self._advance(app, now)
            placed_any = False
            for comp in dormant:
                if self._try_place_one(comp, now):
                    placed_any = True
            if placed_any:
                rt = self.rt[app.spec.id]
                rt.rate = len(app.running_components())
                self._reschedule_completion(app, now)

    # -- event handlers --------------------------------------------------------

    def _on_submit(self, now: int, app_id: int) -> None:
        app = self.state.apps[app_id]
        heapq.heappush(self.queue, (app.spec.priority_key, app_id))
        self._schedule_pending(now)

    def _on_resubmit(self, now: int, app_id: int) -> None:
        app = self.state.apps[app_id]
        app.status = ApplicationStatus.QUEUED
        heapq.heappush(self.queue, (app.spec.priority_key, app_id))
        self._schedule_pending(now)

    def _local_tick(self, comp: ComponentState, now: int) -> int:
        return (now - comp.start_time) // TICK_SECONDS

    def _on_monitor(self, now: int) -> None:
        alloc = RV_ZERO
        used = RV_ZERO
        failures: list[tuple[int, int, int]] = []   # (app_id, comp_id, gen)
        for host in self.state.hosts:
            host.used = RV_ZERO
        for app in sorted(self.state.running_apps(), key=lambda a: a.spec.id):
            rt = self.rt[app.spec.id]
            for comp in sorted(app.running_components(), key=lambda c: c.spec.id):
                series = self.trace.usage[comp.spec.usage_profile_id]
                sample = series.at(self._local_tick(comp, now))
                comp.used = sample
                host = self.state.hosts[comp.host_id]
                host.used = host.used + sample
                alloc = alloc + comp.allocated
                used = used + sample
                rt.alloc_cpu_ticks += comp.allocated.cpus
                rt.used_cpu_ticks += sample.cpus
                rt.alloc_mem_ticks += comp.allocated.memory
                rt.used_mem_ticks += sample.memory
                if self._uses_stat_forecast:
                    self.forecasters[(comp.spec.id, "cpus")].observe(
                        now, sample.cpus)
                    self.forecasters[(comp.spec.id, "memory")].observe(
                        now, sample.memory)
                # Memory is finite: overuse is fatal. CPU overuse only means
                # the component gets throttled, never killed.
                if (self.config.policy != "baseline"
                        and sample.memory > comp.allocated.memory):
                    failures.append((app.spec.id, comp.spec.id, comp.generation))

        self.ticks.append(TickSample(
            t=now, alloc_cpus=alloc.cpus, alloc_mem=alloc.memory,
            used_cpus=used.cpus, used_mem=used.memory,
        ))

        for app_id, comp_id, gen in failures:
            self._push(now, EventKind.FAILURE, (app_id, comp_id, gen))
        if self.config.policy == "optimistic":
            for app_id, comp_id, gen in self._overload_victims():
                self._push(now, EventKind.FAILURE, (app_id, comp_id, gen))

        if not self._all_settled():
            self._push(now + self.config.monitor_interval,
                       EventKind.MONITOR_TICK, ())

    def _overload_victims(self) -> list[tuple[int, int, int]]:
        """Per-host OOM-style victim selection for the optimistic policy.

        Where total memory usage exceeds capacity, kill components in
        descending (used - allocated) memory overshoot, breaking ties toward
        the most recently started, until projected usage fits.
        """
        victims: list[tuple[int, int, int]] = []
        comps_by_host: dict[int, list[tuple[ComponentState, int]]] = {}
        for app in self.state.running_apps():
            for comp in app.running_components():
                comps_by_host.setdefault(comp.host_id, []).append(
                    (comp, app.spec.id))
        for host in self.state.hosts:
            comps = comps_by_host.get(host.id, [])
            excess = sum(c.used.memory for c, _ in comps) - host.capacity.memory
            if excess <= 0:
                continue
            comps.sort(key=lambda item: (
                -(item[0].used.memory - item[0].allocated.memory),
                -item[0].start_time,
                item[0].spec.id,
            ))
            for comp, app_id in comps:
                if excess <= 0:
                    break
                victims.append((app_id, comp.spec.id, comp.generation))
                excess -= comp.used.memory
        return victims

    def _on_shape(self, now: int) -> None:
        if self.config.policy == "baseline":
            return
        demands: dict[int, ResourceVector] = {}
        order = sorted(
            (a.spec.id for a in self.state.running_apps()),
            key=lambda app_id: (self.state.apps[app_id].spec.priority_key, app_id),
        )
        to_shape: list[ComponentState] = []
        for app_id in order:
            app = self.state.apps[app_id]
            exempt = app.failure_count >= self.config.max_failures_before_exempt
            for comp in app.running_components():
                in_grace = now - comp.start_time < self.config.grace_period
                if exempt or in_grace:
                    demands[comp.spec.id] = comp.spec.reservation
                else:
                    to_shape.append(comp)
        for comp, pc, pm in self._predict_many(to_shape, now):
            demands[comp.spec.id] = shaped_demand(
                comp.spec.reservation, pc, pm, self.config.buffer
            )

        if self.config.policy == "pessimistic":
            plan = plan_pessimistic(self.state, demands, order)
        else:
            plan = resolve_optimistic(self.state, demands, order)

        for app_id in plan.preempted_apps:
            self._fail_app(self.state.apps[app_id], now)
        for comp_id in plan.preempted_elastic:
            comp, app = self._find_component(comp_id)
            self._partial_preempt(app, comp, now)
        for comp_id, allocation in plan.new_allocations.items():
            comp, _ = self._find_component(comp_id)
            if comp.status is ComponentStatus.RUNNING:
                host = self.state.hosts[comp.host_id]
                host.allocated = ResourceVector(
                    max(0.0, host.allocated.cpus - comp.allocated.cpus
                        + allocation.cpus),
                    max(0.0, host.allocated.memory - comp.allocated.memory
                        + allocation.memory),
                )
                comp.allocated = allocation

        self._schedule_pending(now)

        if not self._all_settled():
            self._push(now + self.config.monitor_interval,
                       EventKind.SHAPE_TICK, ())

    def _find_component(self, comp_id: int) -> tuple[ComponentState, ApplicationState]:
        app = self.state.apps[self._comp_app[comp_id]]
        return app.components[comp_id], app

    def _predict(self, comp: ComponentState,
                 now: int) -> tuple[PredictiveDistribution, PredictiveDistribution]:
        if self.config.forecaster.tag == "oracle":
            series = self.trace.usage[comp.spec.usage_profile_id]
            nxt = series.at(self._local_tick(comp, now) + 1)
            return (PredictiveDistribution(nxt.cpus, 0.0),
                    PredictiveDistribution(nxt.memory, 0.0))
        return (self.forecasters[(comp.spec.id, "cpus")].predict(),
                self.forecasters[(comp.spec.id, "memory")].predict())

    def _predict_many(
        self, comps: list[ComponentState], now: int
    ) -> list[tuple[ComponentState, PredictiveDistribution, PredictiveDistribution]]:
        """Per-component one-step-ahead predictions, batched across streams."""
        if self.config.forecaster.tag == "oracle":
            return [(c, *self._predict(c, now)) for c in comps]
        fcs = [self.forecasters[(c.spec.id, res)]
               for c in comps for res in ("cpus", "memory")]
        preds = batch_predict(fcs)
        return [(c, preds[2 * i], preds[2 * i + 1])
                for i, c in enumerate(comps)]

    # -- failures and completion ------------------------------------------------

    def _on_failure(self, now: int, app_id: int, comp_id: int, gen: int) -> None:
        app = self.state.apps[app_id]
        if app.status is not ApplicationStatus.RUNNING:
            return
        comp = app.components[comp_id]
        if comp.generation != gen or comp.status is not ComponentStatus.RUNNING:
            return
        if comp.spec.kind is ComponentKind.CORE:
            self._fail_app(app, now)
        else:
            self._partial_preempt(app, comp, now)
        self._schedule_pending(now)

    def _fail_app(self, app: ApplicationState, now: int) -> None:
        rt = self.rt[app.spec.id]
        self._advance(app, now)
        app.lost_work += app.accrued_work
        app.accrued_work = 0.0
        for comp in app.components.values():
            if comp.status is ComponentStatus.RUNNING:
                self._release_component(comp, ComponentStatus.PREEMPTED)
        app.status = ApplicationStatus.FAILED
        app.failure_count += 1
        rt.rate = 0
        rt.version += 1
        if app.failure_count > RESUBMIT_CAP:
            rt.permanently_failed = True
        else:
            self._push(now, EventKind.RESUBMIT, (app.spec.id,))

    def _partial_preempt(self, app: ApplicationState, comp: ComponentState,
                         now: int) -> None:
        rt = self.rt[app.spec.id]
        self._advance(app, now)
        lost = self.config.elastic_loss_fraction * comp.placement_work
        app.lost_work += lost
        app.accrued_work -= lost
        self._release_component(comp, ComponentStatus.PREEMPTED)
        rt.rate = len(app.running_components())
        self._reschedule_completion(app, now)

    def _on_complete(self, now: int, app_id: int, version: int) -> None:
        app = self.state.apps[app_id]
        rt = self.rt[app_id]
        if version != rt.version or app.status is not ApplicationStatus.RUNNING:
            return
        remaining = app.spec.total_work - app.accrued_work
        if rt.rate <= 0:
            return
        dt = remaining / rt.rate
        app.accrued_work = app.spec.total_work
        for comp in app.components.values():
            if comp.status is ComponentStatus.RUNNING:
                app.work_ledger[comp.spec.id] += dt
                comp.placement_work += dt
        rt.last_accrual += dt
        for comp in app.components.values():
            if comp.status is ComponentStatus.RUNNING:
                self._release_component(comp, ComponentStatus.FINISHED)
            else:
                comp.status = ComponentStatus.FINISHED
        app.status = ApplicationStatus.FINISHED
        app.completion_time = now
        rt.rate = 0
        rt.version += 1
        self._schedule_pending(now)

    # -- report ------------------------------------------------------------------

    def _build_report(self) -> SimulationReport:
        records = []
        for app_id in sorted(self.state.apps):
            app = self.state.apps[app_id]
            rt = self.rt[app_id]
            completed = app.status is ApplicationStatus.FINISHED
            records.append(AppRecord(
                id=app_id,
                kind=app.spec.kind.value,
                first_submission=app.first_submission,
                completion=app.completion_time if completed else None,
                turnaround=(app.completion_time - app.first_submission
                            if completed else None),
                failure_count=app.failure_count,
                lost_work=app.lost_work,
                permanently_failed=rt.permanently_failed,
                alloc_cpu_ticks=rt.alloc_cpu_ticks,
                used_cpu_ticks=rt.used_cpu_ticks,
                alloc_mem_ticks=rt.alloc_mem_ticks,
                used_mem_ticks=rt.used_mem_ticks,
                total_work=app.spec.total_work,
                accrued_work=app.accrued_work,
                ledger_total=sum(app.work_ledger.values()),
            ))
        from .report import compute_aggregates
        config_echo = _config_to_dict(self.config)
        report = SimulationReport(config=config_echo, apps=records,
                                  ticks=self.ticks, aggregates={})
        report.aggregates = compute_aggregates(report)
        return report


def _config_to_dict(config: SimConfig) -> dict:
    return {
        "policy": config.policy,
        "forecaster": {
            "tag": config.forecaster.tag,
            "kernel": config.forecaster.kernel,
            "h": config.forecaster.h,
            "n_max": config.forecaster.n_max,
        },
        "buffer": {"k1": config.buffer.k1, "k2": config.buffer.k2},
        "monitor_interval": config.monitor_interval,
        "grace_period": config.grace_period,
        "max_failures_before_exempt": config.max_failures_before_exempt,
        "elastic_loss_fraction": config.elastic_loss_fraction,
        "placement": config.placement,
        "host_count": config.host_count,
        "host_capacity": {"cpus": config.host_capacity.cpus,
                          "memory_mb": config.host_capacity.memory},
        "rng_seed": config.rng_seed,
    }


def sim_config_from_dict(d: dict) -> SimConfig:
    d = dict(d)
    known = {
        "policy", "forecaster", "buffer", "monitor_interval", "grace_period",
        "max_failures_before_exempt", "elastic_loss_fraction", "placement",
        "host_count", "host_capacity", "rng_seed",
    }
    unknown = set(d) - known
    if unknown:
        raise ValueError(f"unknown sim config keys: {sorted(unknown)}")
    kwargs: dict = {"policy": d["policy"]}
    if "forecaster" in d:
        f = d["forecaster"]
        extra = set(f) - {"tag", "kernel", "h", "n_max"}
        if extra:
            raise ValueError(f"unknown forecaster keys: {sorted(extra)}")
        kwargs["forecaster"] = ForecasterKind(
            tag=f["tag"], kernel=f.get("kernel", "exponential"),
            h=f.get("h", 10), n_max=f.get("n_max", 10),
        )
    if "buffer" in d:
        b = d["buffer"]
        extra = set(b) - {"k1", "k2"}
        if extra:
            raise ValueError(f"unknown buffer keys: {sorted(extra)}")
        kwargs["buffer"] = BufferParams(k1=b["k1"], k2=b["k2"])
    if "host_capacity" in d:
        hc = d["host_capacity"]
        kwargs["host_capacity"] = ResourceVector(hc["cpus"], hc["memory_mb"])
    for key in ("monitor_interval", "grace_period", "max_failures_before_exempt",
                "elastic_loss_fraction", "placement", "host_count", "rng_seed"):
        if key in d:
            kwargs[key] = d[key]
    return SimConfig(**kwargs)


def run(trace: WorkloadTrace, config: SimConfig) -> SimulationReport:
    return Simulation(trace, config).run()
