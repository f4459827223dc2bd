import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.special import jn_zeros

from electroheat.errors import ParameterError
from electroheat.fem import mass_matrix
from electroheat.heat import (
    FLUX_CSV_HEADER,
    assemble_weighted_eigen,
    boundary_heat_flux,
    solve_impulse_response,
    solve_static_heat,
    solve_transient_eigen,
    solve_transient_timestep,
    static_heat_flux,
    write_flux_csv,
)
from electroheat.mesh import build_disk_mesh
from electroheat.models import FieldRole, ScalarField, SourceHistory, TensorField


def _mass_gap(mesh, reference, other):
    mass = mass_matrix(mesh)
    diff = reference - other
    return float(np.sqrt(diff @ (mass @ diff) / (reference @ (mass @ reference))))


class TestWeightedEigen:
    def test_eigenvectors_are_weighted_orthonormal(self, unit_triple):
        eig = assemble_weighted_eigen(unit_triple.mesh, unit_triple.kappa, unit_triple.thermal, n_modes=12)
        assert_allclose(eig.gram(), np.eye(12), atol=1e-10)
        assert np.all(np.diff(eig.eigenvalues) >= 0.0)

    def test_first_eigenvalue_of_the_disk(self):
        mesh = build_disk_mesh(0.05)
        kappa = ScalarField.constant(mesh, 1.0, role=FieldRole.KAPPA)
        eig = assemble_weighted_eigen(mesh, kappa, TensorField.identity(mesh, role=FieldRole.THERMAL), n_modes=3)
        assert_allclose(eig.eigenvalues[0], jn_zeros(0, 1)[0] ** 2, rtol=0.01)

    def test_doubling_kappa_doubles_the_spectrum(self, unit_triple):
        mesh = unit_triple.mesh
        eig = assemble_weighted_eigen(mesh, unit_triple.kappa, unit_triple.thermal, n_modes=8)
        doubled = assemble_weighted_eigen(mesh, unit_triple.kappa.scaled(2.0), unit_triple.thermal, n_modes=8)
        assert_allclose(doubled.eigenvalues, 2.0 * eig.eigenvalues, rtol=1e-8)

    def test_sparse_path_agrees_with_dense(self, unit_triple):
        mesh = unit_triple.mesh
        dense = assemble_weighted_eigen(mesh, unit_triple.kappa, unit_triple.thermal, n_modes=6)
        sparse = assemble_weighted_eigen(mesh, unit_triple.kappa, unit_triple.thermal, n_modes=6, dense_limit=0)
        assert_allclose(sparse.eigenvalues, dense.eigenvalues, rtol=1e-9)

    @pytest.mark.parametrize("n_modes", [0, 10**6])
    def test_rejects_bad_mode_count(self, unit_triple, n_modes):
        with pytest.raises(ParameterError):
            assemble_weighted_eigen(unit_triple.mesh, unit_triple.kappa, unit_triple.thermal, n_modes=n_modes)


def test_static_heat_of_unit_source(mesh):
    source = ScalarField.constant(mesh, 1.0, role=FieldRole.SOURCE)
    thermal = TensorField.identity(mesh, role=FieldRole.THERMAL)
    psi0 = solve_static_heat(mesh, thermal, source)
    exact = (1.0 - np.sum(mesh.nodes**2, axis=1)) / 4.0
    assert np.max(np.abs(psi0 - exact)) < 5e-3
    flux = static_heat_flux(mesh, thermal, psi0, source)
    # the boundary sum rule holds exactly for the consistent flux
    assert_allclose(flux.integral(), -source.integral(), rtol=1e-10)
    assert_allclose(flux.integral() / flux.weights.sum(), -0.5, rtol=0.01)


def test_eigen_and_timestep_agree(unit_triple):
    mesh = unit_triple.mesh
    source = SourceHistory.static(ScalarField.constant(mesh, 1.0, role=FieldRole.SOURCE))
    times = np.linspace(0.0, 0.1, 101)
    eig = assemble_weighted_eigen(mesh, unit_triple.kappa, unit_triple.thermal, n_modes=60)
    modal = solve_transient_eigen(eig, source, times)
    stepped = solve_transient_timestep(mesh, unit_triple.kappa, unit_triple.thermal, source, times, theta=0.5)
    assert _mass_gap(mesh, modal.values[-1], stepped.values[-1]) < 1e-3
    assert modal.values[0].max() == 0.0


def test_separable_source_follows_profile(unit_triple):
    mesh = unit_triple.mesh
    times = np.linspace(0.0, 0.2, 201)
    spatial = ScalarField.from_function(mesh, lambda p: 1.0 - p[:, 0] ** 2, role=FieldRole.SOURCE)
    source = SourceHistory.separable(spatial, np.sin(np.pi * times / 0.2), times)
    eig = assemble_weighted_eigen(mesh, unit_triple.kappa, unit_triple.thermal, n_modes=60)
    modal = solve_transient_eigen(eig, source, times)
    stepped = solve_transient_timestep(mesh, unit_triple.kappa, unit_triple.thermal, source, times)
    assert _mass_gap(mesh, modal.values[100], stepped.values[100]) < 1e-3


def test_general_source_is_rejected_by_the_eigen_solver(unit_triple):
    mesh = unit_triple.mesh
    times = np.array([0.0, 0.1])
    source = SourceHistory.general(mesh, np.ones((2, mesh.n_nodes)), times)
    eig = assemble_weighted_eigen(mesh, unit_triple.kappa, unit_triple.thermal, n_modes=4)
    with pytest.raises(ParameterError):
        solve_transient_eigen(eig, source, times)


def test_few_modes_report_truncation(unit_triple):
    mesh = unit_triple.mesh
    source = SourceHistory.static(ScalarField.constant(mesh, 1.0, role=FieldRole.SOURCE))
    eig = assemble_weighted_eigen(mesh, unit_triple.kappa, unit_triple.thermal, n_modes=2)
    result = solve_transient_eigen(eig, source, np.linspace(0.0, 0.01, 3), tolerance=1e-12)
    assert result.truncation_estimate > 1e-12
    assert result.notes


def test_impulse_response_decays(unit_triple):
    mesh = unit_triple.mesh
    eig = assemble_weighted_eigen(mesh, unit_triple.kappa, unit_triple.thermal, n_modes=20)
    w = ScalarField.constant(mesh, 1.0, role=FieldRole.SOURCE)
    response = solve_impulse_response(eig, w, [0.1, 0.5, 1.0])
    peaks = np.abs(response.values).max(axis=1)
    assert np.all(np.diff(peaks) < 0.0)
    with pytest.raises(ParameterError):
        solve_impulse_response(eig, w, [0.0, 0.1])


@pytest.mark.parametrize("theta", [0.4, 1.2])
def test_theta_out_of_range(unit_triple, theta):
    mesh = unit_triple.mesh
    source = SourceHistory.static(ScalarField.constant(mesh, 1.0, role=FieldRole.SOURCE))
    with pytest.raises(ParameterError):
        solve_transient_timestep(mesh, unit_triple.kappa, unit_triple.thermal, source, [0.0, 0.1], theta)


def test_transient_flux_tends_to_static_flux(unit_triple, tmp_path):
    mesh = unit_triple.mesh
    spatial = ScalarField.constant(mesh, 1.0, role=FieldRole.SOURCE)
    source = SourceHistory.static(spatial)
    times = np.linspace(0.0, 3.0, 61)
    eig = assemble_weighted_eigen(mesh, unit_triple.kappa, unit_triple.thermal, n_modes=30)
    psi = solve_transient_eigen(eig, source, times)
    traces = boundary_heat_flux(psi, unit_triple.thermal, unit_triple.kappa, source)
    static = static_heat_flux(mesh, unit_triple.thermal, solve_static_heat(mesh, unit_triple.thermal, spatial), spatial)
    assert_allclose(traces[-1].values, static.values, rtol=1e-4, atol=1e-6)

    path = write_flux_csv(tmp_path / "flux.csv", traces[:2])
    lines = path.read_text().splitlines()
    assert lines[0] == FLUX_CSV_HEADER
    assert len(lines) == 1 + 2 * mesh.boundary_nodes.size


@pytest.mark.parametrize("method", ["eigen", "timestep"])
def test_transient_part_decays_for_static_sources(unit_triple, method):
    mesh = unit_triple.mesh
    spatial = ScalarField.from_function(mesh, lambda p: np.exp(-4.0 * (p[:, 0] ** 2 + p[:, 1] ** 2)), role=FieldRole.SOURCE)
    source = SourceHistory.static(spatial)
    times = np.linspace(0.0, 0.2, 41)
    eig = assemble_weighted_eigen(mesh, unit_triple.kappa, unit_triple.thermal, n_modes=30)
    if method == "eigen":
        psi = solve_transient_eigen(eig, source, times)
    else:
        psi = solve_transient_timestep(mesh, unit_triple.kappa, unit_triple.thermal, source, times, theta=1.0)
    psi0 = solve_static_heat(mesh, unit_triple.thermal, spatial)
    transient = (psi.values - psi0)[:, eig.interior]
    norms = np.sqrt(np.einsum("ti,ti->t", transient, (eig.mass @ transient.T).T))
    # psi_1 = psi - psi0 is nonincreasing in the weighted norm
    assert np.all(np.diff(norms) <= 1e-12 * norms[0])
    assert norms[-1] < norms[0]
