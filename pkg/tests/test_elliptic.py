import numpy as np
import pytest
from numpy.testing import assert_allclose

from electroheat.catalog import build_conductivity
from electroheat.elliptic import (
    ConductivitySolver,
    dn_map,
    dn_pairing,
    energy_density,
    energy_form,
    liouville_potential,
    liouville_residual,
    solve_conductivity,
)
from electroheat.errors import ParameterError
from electroheat.mesh import build_disk_mesh
from electroheat.models import BoundaryData, ScalarField, TensorField


def test_trace_is_imposed_exactly(mesh):
    gamma = build_conductivity("gaussian").tensor_field(mesh)
    f = BoundaryData.from_function(mesh, lambda x, y: np.cos(3 * np.arctan2(y, x)))
    u = solve_conductivity(mesh, gamma, f)
    assert np.array_equal(u.values[mesh.boundary_nodes], f.values)


def test_unit_conductivity_energy_of_x(mesh, x_trace):
    u = solve_conductivity(mesh, TensorField.identity(mesh), x_trace)
    assert_allclose(energy_form(u), np.pi, rtol=0.02)
    # the Joule density of u = x is identically one
    assert_allclose(energy_density(u).values, 1.0, atol=1e-8)


def test_energy_matches_dn_pairing_and_is_symmetric(mesh):
    gamma = build_conductivity("quadratic", beta_x=0.3, beta_y=0.1).tensor_field(mesh)
    f = BoundaryData.from_function(mesh, lambda x, y: x + 0.5 * y * y)
    g = BoundaryData.from_function(mesh, lambda x, y: x * y)
    u = solve_conductivity(mesh, gamma, f)
    assert_allclose(dn_map(u).pairing(f), energy_form(u), rtol=1e-10)
    assert_allclose(dn_pairing(mesh, gamma, f, g), dn_pairing(mesh, gamma, g, f), rtol=1e-8, atol=1e-12)


def test_dn_map_annihilates_constants(mesh):
    gamma = build_conductivity("exponential", alpha=0.4).tensor_field(mesh)
    one = BoundaryData(mesh, np.ones(mesh.boundary_nodes.size))
    flux = dn_map(solve_conductivity(mesh, gamma, one))
    assert np.max(np.abs(flux.values)) < 1e-9


def test_solver_reuses_factorization_for_many_traces(mesh):
    solver = ConductivitySolver(TensorField.identity(mesh))
    traces = [BoundaryData.from_function(mesh, lambda x, y, m=m: np.cos(m * np.arctan2(y, x))) for m in (1, 2, 3)]
    voltages = solver.solve_many(traces)
    assert [v.boundary for v in voltages] == traces


def test_rejects_mixed_meshes(mesh, coarse_mesh):
    gamma = TensorField.identity(mesh)
    with pytest.raises(ParameterError):
        solve_conductivity(coarse_mesh, gamma, BoundaryData.from_function(coarse_mesh, lambda x, y: x))


def test_liouville_potential_needs_closed_form(mesh):
    with pytest.raises(ParameterError):
        liouville_potential(ScalarField.constant(mesh, 1.0))
    q = liouville_potential(build_conductivity("exponential", alpha=1.0).scalar_field(mesh))
    assert_allclose(q.values, 0.25, rtol=1e-12)


def test_scaled_catalog_field_keeps_its_closed_form(mesh):
    conductivity = build_conductivity("gaussian", amplitude=0.2, width=0.5)
    field = conductivity.scalar_field(mesh)
    scaled = field.scaled(3.0)
    assert_allclose(scaled.closed_form.gamma(mesh.nodes), scaled.values, rtol=1e-12)
    assert scaled.closed_form.params["scale"] == 3.0
    # the potential is invariant under constant scaling
    assert_allclose(liouville_potential(scaled).values, liouville_potential(field).values, atol=1e-10)
    assert field.scaled(-1.0).closed_form is None
    with pytest.raises(ParameterError):
        conductivity.scaled(0.0)


def test_liouville_residual_decreases_under_refinement():
    conductivity = build_conductivity("gaussian", amplitude=0.2, width=0.5)
    residuals = []
    for h in (0.1, 0.05):
        mesh = build_disk_mesh(h)
        f = BoundaryData.from_function(mesh, lambda x, y: x - y)
        u = solve_conductivity(mesh, conductivity.tensor_field(mesh), f)
        residuals.append(liouville_residual(u, conductivity))
    assert residuals[1] < residuals[0]
    assert residuals[1] < 0.05


@pytest.mark.parametrize("h", [0.2, 0.1, 0.05])
def test_maximum_principle(h):
    mesh = build_disk_mesh(h)
    f = BoundaryData.from_function(mesh, lambda x, y: np.cos(3 * np.arctan2(y, x)) + 0.5 * y)
    u = solve_conductivity(mesh, TensorField.identity(mesh), f)
    tol = 1e-12 * np.abs(f.values).max()
    assert u.values.min() >= f.values.min() - tol
    assert u.values.max() <= f.values.max() + tol
