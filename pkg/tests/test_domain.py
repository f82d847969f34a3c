"""Unit and property tests for the core data model."""

import pytest
from hypothesis import given, strategies as st

from shapesim.domain import (
    ApplicationKind,
    ApplicationSpec,
    ApplicationState,
    ApplicationStatus,
    ClusterState,
    ComponentKind,
    ComponentSpec,
    ComponentState,
    ComponentStatus,
    Host,
    ResourceUnderflowError,
    ResourceVector,
    RV_ZERO,
)

finite_res = st.floats(min_value=0.0, max_value=1e9,
                       allow_nan=False, allow_infinity=False)


def rv(cpus=1.0, mem=1024.0):
    return ResourceVector(cpus, mem)


class TestResourceVector:
    def test_add(self):
        assert rv(1, 2) + rv(3, 4) == rv(4, 6)

    def test_sub_checked_exact_to_zero(self):
        assert rv(3, 5).sub_checked(rv(3, 5)) == RV_ZERO

    def test_sub_checked_underflow_cpus(self):
        with pytest.raises(ResourceUnderflowError) as exc:
            rv(1, 10).sub_checked(rv(2, 0))
        assert exc.value.dimension == "cpus"
        assert exc.value.have == 1.0
        assert exc.value.want == 2.0

    def test_sub_checked_underflow_memory(self):
        with pytest.raises(ResourceUnderflowError) as exc:
            rv(5, 1).sub_checked(rv(0, 2))
        assert exc.value.dimension == "memory"

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            ResourceVector(-1.0, 0.0)
        with pytest.raises(ValueError):
            ResourceVector(0.0, -0.001)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            ResourceVector(float("nan"), 0.0)
        with pytest.raises(ValueError):
            ResourceVector(0.0, float("inf"))

    def test_scale_and_clamp(self):
        assert rv(2, 10).scale(0.5) == rv(1, 5)
        assert rv(2, 10).clamp_to(rv(1, 20)) == rv(1, 10)

    def test_fits_in_boundary(self):
        assert rv(1, 1).fits_in(rv(1, 1))
        assert not rv(1, 1 + 1e-9).fits_in(rv(1, 1))

    @given(a_c=finite_res, a_m=finite_res, b_c=finite_res, b_m=finite_res)
    def test_fits_iff_sub_checked_succeeds(self, a_c, a_m, b_c, b_m):
        a, b = ResourceVector(a_c, a_m), ResourceVector(b_c, b_m)
        fits = b.fits_in(a)
        try:
            diff = a.sub_checked(b)
            assert fits
            assert diff.cpus == a.cpus - b.cpus
            assert diff.memory == a.memory - b.memory
        except ResourceUnderflowError:
            assert not fits

    @given(a_c=finite_res, a_m=finite_res, b_c=finite_res, b_m=finite_res)
    def test_add_then_sub_roundtrip(self, a_c, a_m, b_c, b_m):
        a, b = ResourceVector(a_c, a_m), ResourceVector(b_c, b_m)
        total = a + b
        back = total.sub_checked(b)
        assert back.cpus == pytest.approx(a.cpus, abs=1e-6)
        assert back.memory == pytest.approx(a.memory, abs=1e-6)


class TestHost:
    def test_free_is_capacity_minus_allocated(self):
        h = Host(id=0, capacity=rv(32, 1000), allocated=rv(10, 400))
        assert h.free == rv(22, 600)

    def test_free_floors_at_zero_when_overallocated(self):
        h = Host(id=0, capacity=rv(32, 1000), allocated=rv(40, 1200))
        assert h.free == RV_ZERO


def make_spec(app_id=0, n_core=1, n_elastic=2, next_id=0):
    core = tuple(
        ComponentSpec(id=next_id + i, application_id=app_id,
                      kind=ComponentKind.CORE, reservation=rv(),
                      usage_profile_id=next_id + i)
        for i in range(n_core)
    )
    elastic = tuple(
        ComponentSpec(id=next_id + n_core + i, application_id=app_id,
                      kind=ComponentKind.ELASTIC, reservation=rv(),
                      usage_profile_id=next_id + n_core + i)
        for i in range(n_elastic)
    )
    kind = ApplicationKind.ELASTIC if n_elastic else ApplicationKind.RIGID
    return ApplicationSpec(id=app_id, kind=kind, core_components=core,
                           elastic_components=elastic, total_work=3600.0,
                           submission_time=0, priority_key=0)


class TestSpecs:
    def test_component_requires_positive_reservation(self):
        with pytest.raises(ValueError):
            ComponentSpec(id=0, application_id=0, kind=ComponentKind.CORE,
                          reservation=ResourceVector(0.0, 100.0),
                          usage_profile_id=0)

    def test_app_requires_core(self):
        with pytest.raises(ValueError):
            ApplicationSpec(id=0, kind=ApplicationKind.RIGID,
                            core_components=(), elastic_components=(),
                            total_work=1.0, submission_time=0, priority_key=0)

    def test_rigid_app_rejects_elastic_components(self):
        spec = make_spec(n_elastic=2)
        with pytest.raises(ValueError):
            ApplicationSpec(id=1, kind=ApplicationKind.RIGID,
                            core_components=spec.core_components,
                            elastic_components=spec.elastic_components,
                            total_work=1.0, submission_time=0, priority_key=0)

    def test_all_components_order(self):
        spec = make_spec(n_core=2, n_elastic=3)
        assert spec.all_components == (spec.core_components
                                       + spec.elastic_components)


class TestState:
    def test_app_state_builds_component_states(self):
        app = ApplicationState(spec=make_spec(n_core=1, n_elastic=2))
        assert set(app.components) == {c.id for c in app.spec.all_components}
        assert all(c.status is ComponentStatus.PENDING
                   for c in app.components.values())
        assert app.running_components() == []

    def test_time_alive_only_while_running(self):
        comp = ComponentState(spec=make_spec().core_components[0])
        assert comp.time_alive(100) == 0
        comp.status = ComponentStatus.RUNNING
        comp.start_time = 40
        assert comp.time_alive(100) == 60

    def test_host_allocation_sums_reconcile(self):
        app = ApplicationState(spec=make_spec(n_core=1, n_elastic=1))
        app.status = ApplicationStatus.RUNNING
        comps = list(app.components.values())
        comps[0].status = ComponentStatus.RUNNING
        comps[0].host_id = 0
        comps[0].allocated = rv(2, 100)
        comps[1].status = ComponentStatus.RUNNING
        comps[1].host_id = 1
        comps[1].allocated = rv(1, 50)
        state = ClusterState(
            hosts=[Host(id=0, capacity=rv(32, 1000)),
                   Host(id=1, capacity=rv(32, 1000))],
            apps={0: app},
        )
        sums = state.host_allocation_sums()
        assert sums[0] == rv(2, 100)
        assert sums[1] == rv(1, 50)
