import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from electroheat.catalog import build_conductivity
from electroheat.elliptic import dn_pairing, energy_form, solve_conductivity
from electroheat.errors import ParameterError
from electroheat.geometry import make_bump_diffeo, pushforward_triple
from electroheat.mesh import build_disk_mesh
from electroheat.measurement import (
    ElectrostaticCache,
    get_cache,
    energy_recovery_report,
    export_record,
    flux_discrepancy,
    recover_dn_pairing,
    recover_energy_static,
    separable_source,
    time_grid,
    voltage_to_heat_flow,
)
from electroheat.models import BoundaryData, CoefficientTriple, ExcitationSchedule, FieldRole, ScalarField, SourceKind


@pytest.fixture
def triple(mesh):
    return CoefficientTriple(
        gamma=build_conductivity("gaussian", amplitude=0.2, width=0.5).tensor_field(mesh),
        kappa=ScalarField.constant(mesh, 1.0, role=FieldRole.KAPPA),
        thermal=build_conductivity("constant").tensor_field(mesh, role=FieldRole.THERMAL),
        label="gaussian",
    )


@pytest.fixture
def cache():
    return ElectrostaticCache()


def test_time_grid():
    assert_allclose(time_grid(0.5, 0.1), [0.0, 0.1, 0.2, 0.3, 0.4, 0.5])
    with pytest.raises(ParameterError):
        time_grid(0.55, 0.1)
    with pytest.raises(ParameterError):
        time_grid(0.0, 0.1)


def test_separable_source_is_joule_density(triple, x_trace, cache):
    static = separable_source(triple, x_trace, cache=cache)
    assert static.kind is SourceKind.STATIC
    times = time_grid(0.1, 0.05)
    separable = separable_source(triple, x_trace, np.array([0.0, 0.25, 1.0]), times, cache=cache)
    assert separable.kind is SourceKind.SEPARABLE
    assert_allclose(separable.nodal(1), 0.25 * static.nodal(0))


def test_cache_reuses_voltages(triple, x_trace, cache):
    assert cache.voltage(triple, x_trace) is cache.voltage(triple, x_trace)
    assert cache.eigen(triple, 4) is cache.eigen(triple, 4)
    cache.clear()
    assert cache.eigen(triple, 4).n_modes == 4


def test_default_cache_separates_equal_meshes():
    first, second = build_disk_mesh(0.2), build_disk_mesh(0.2)
    records = []
    for mesh, trace in ((first, lambda x, y: x), (second, lambda x, y: y)):
        schedule = ExcitationSchedule(profile=BoundaryData.from_function(mesh, trace))
        records.append(voltage_to_heat_flow(CoefficientTriple.unit(mesh), schedule, 0.1, 0.05, n_modes=10))
    assert records[0].mesh is first
    assert records[1].mesh is second
    assert get_cache().voltage(CoefficientTriple.unit(second), BoundaryData.from_function(second, lambda x, y: y)).mesh is second


def test_cache_slots_follow_the_mesh(triple, x_trace, cache, coarse_mesh):
    cache.voltage(triple, x_trace)
    cache.voltage(CoefficientTriple.unit(coarse_mesh), BoundaryData.from_function(coarse_mesh, lambda x, y: x))
    assert len(cache) == 2
    cache.clear()
    assert len(cache) == 0


def test_eigen_and_timestep_measurements_agree(triple, x_trace, cache):
    times = time_grid(0.2, 0.002)
    schedule = ExcitationSchedule(profile=x_trace, g=times / 0.2, times=times, static=False, label="ramp")
    eigen = voltage_to_heat_flow(triple, schedule, 0.2, 0.002, n_modes=60, cache=cache)
    stepped = voltage_to_heat_flow(triple, schedule, 0.2, 0.002, method="timestep", cache=cache)
    assert eigen.flux_matrix().shape == (times.size, triple.mesh.boundary_nodes.size)
    assert flux_discrepancy(eigen, stepped) < 2e-2
    assert eigen.metadata["method"] == "eigen"


def test_unknown_method(triple, x_trace):
    with pytest.raises(ParameterError):
        voltage_to_heat_flow(triple, ExcitationSchedule(profile=x_trace), 0.1, 0.05, method="spectral")


def test_flux_discrepancy_rejects_mismatched_grids(triple, x_trace, cache):
    schedule = ExcitationSchedule(profile=x_trace)
    first = voltage_to_heat_flow(triple, schedule, 0.1, 0.05, n_modes=10, cache=cache)
    second = voltage_to_heat_flow(triple, schedule, 0.1, 0.025, n_modes=10, cache=cache)
    assert flux_discrepancy(first, first) == 0.0
    with pytest.raises(ParameterError):
        flux_discrepancy(first, second)


def test_gauge_invariance_of_the_measurement(triple, cache):
    diffeo = make_bump_diffeo(center=(0.1, 0.1), radius=0.45, amplitude=(0.05, -0.04))
    trace = BoundaryData.from_function(triple.mesh, lambda x, y: np.cos(2 * np.arctan2(y, x)), label="cos2")
    schedule = ExcitationSchedule(profile=trace)
    reference = voltage_to_heat_flow(triple, schedule, 0.2, 0.02, n_modes=40, cache=cache)
    pushed = voltage_to_heat_flow(pushforward_triple(triple, diffeo), schedule, 0.2, 0.02, n_modes=40, cache=cache)
    assert flux_discrepancy(reference, pushed) < 0.1


def test_export_record(tmp_path, triple, x_trace, cache):
    record = voltage_to_heat_flow(triple, ExcitationSchedule(profile=x_trace, label="x"), 0.1, 0.05, n_modes=10, cache=cache)
    csv_path, json_path = export_record(record, tmp_path, "x")
    sidecar = json.loads(json_path.read_text())
    assert sidecar["triple_id"] == record.triple_id
    assert sidecar["times"]["count"] == 3
    rows = csv_path.read_text().splitlines()
    assert len(rows) == 1 + 3 * triple.mesh.boundary_nodes.size


class TestEnergyRecovery:
    def test_unit_conductivity_recovers_pi(self, unit_triple, x_trace):
        report = energy_recovery_report(unit_triple, x_trace, 1e-6, n_modes=40, cache=ElectrostaticCache())
        assert_allclose(report.energy, np.pi, rtol=0.02)
        reference = energy_form(solve_conductivity(unit_triple.mesh, unit_triple.gamma, x_trace))
        assert_allclose(report.limit_energy, reference, rtol=1e-8)
        assert report.checks == len(report.history)
        assert report.stop_time == pytest.approx(0.5 * report.checks / report.lambda_1)

    def test_scaling_the_input_scales_energy_quadratically(self, triple, x_trace, cache):
        base = recover_energy_static(triple, x_trace, n_modes=40, cache=cache)
        doubled = recover_energy_static(triple, x_trace.scaled(2.0), n_modes=40, cache=cache)
        assert_allclose(doubled, 4.0 * base, rtol=1e-6)

    def test_polarization_recovers_dn_pairing(self, triple, cache):
        mesh = triple.mesh
        f = BoundaryData.from_function(mesh, lambda x, y: x, label="x")
        g = BoundaryData.from_function(mesh, lambda x, y: x + y * y, label="g")
        recovered = recover_dn_pairing(triple, f, g, n_modes=40, cache=cache)
        assert_allclose(recovered, dn_pairing(mesh, triple.gamma, f, g), rtol=1e-4, atol=1e-6)
