import numpy as np
import pytest
from numpy.testing import assert_allclose

from electroheat.catalog import build_conductivity
from electroheat.elliptic import energy_form, solve_conductivity
from electroheat.errors import DiffeomorphismError, ParameterError
from electroheat.mesh import build_disk_mesh
from electroheat.geometry import (
    compose,
    determinant_defect,
    disk_sample_points,
    identity_diffeo,
    make_bump_diffeo,
    pushforward_kappa,
    pushforward_source,
    pushforward_tensor,
    pushforward_triple,
    random_bump_diffeo,
)
from electroheat.models import BoundaryData, CoefficientTriple, FieldRole, ScalarField, TensorField


@pytest.fixture
def bump():
    return make_bump_diffeo(center=(0.1, -0.2), radius=0.5, amplitude=(0.06, 0.04))


class TestBumpDiffeo:
    def test_round_trip_and_boundary(self, bump):
        samples = disk_sample_points()
        assert_allclose(bump.inverse(bump.forward(samples)), samples, atol=1e-8)
        angles = np.linspace(0.0, 2.0 * np.pi, 50)
        circle = np.column_stack((np.cos(angles), np.sin(angles)))
        assert_allclose(bump.forward(circle), circle, atol=1e-12)

    def test_jacobian_matches_finite_differences(self, bump):
        points = np.array([[0.1, -0.2], [0.3, 0.0], [-0.1, -0.4]])
        eps = 1e-6
        numeric = np.empty((3, 2, 2))
        for j in range(2):
            step = np.zeros(2)
            step[j] = eps
            numeric[:, :, j] = (bump.forward(points + step) - bump.forward(points - step)) / (2 * eps)
        assert_allclose(bump.jacobian(points), numeric, atol=1e-7)

    def test_positive_determinant(self, bump):
        assert bump.determinant(disk_sample_points()).min() > 0.0

    def test_rejects_bump_touching_boundary(self):
        with pytest.raises(ParameterError):
            make_bump_diffeo(center=(0.6, 0.0), radius=0.5, amplitude=(0.01, 0.0))

    def test_rejects_large_amplitude(self):
        with pytest.raises(DiffeomorphismError):
            make_bump_diffeo(center=(0.0, 0.0), radius=0.5, amplitude=(0.2, 0.0))

    def test_random_draws_are_reproducible(self):
        first = random_bump_diffeo(np.random.default_rng(5))
        second = random_bump_diffeo(np.random.default_rng(5))
        assert first.label == second.label


def test_compose_inverts_in_reverse_order(bump):
    other = make_bump_diffeo(center=(-0.2, 0.2), radius=0.4, amplitude=(0.0, 0.05))
    both = compose(other, bump)
    samples = disk_sample_points(21)
    assert_allclose(both.inverse(both.forward(samples)), samples, atol=1e-8)
    expected = other.determinant(bump.forward(samples)) * bump.determinant(samples)
    assert_allclose(both.determinant(samples), expected, rtol=1e-12)


def test_identity_pushforward_is_a_no_op(mesh):
    gamma = build_conductivity("gaussian").tensor_field(mesh)
    pushed = pushforward_tensor(gamma, identity_diffeo())
    assert_allclose(pushed.values, gamma.values, atol=1e-12)


def test_determinant_identity_in_two_dimensions(mesh, bump):
    gamma = build_conductivity("quadratic").tensor_field(mesh)
    assert determinant_defect(gamma, bump) < 1e-10


def test_pushed_source_keeps_its_integral(mesh, bump):
    source = ScalarField.from_function(mesh, lambda p: 1.0 + p[:, 0] ** 2, role=FieldRole.SOURCE)
    pushed = pushforward_source(source, bump)
    assert_allclose(pushed.integral(), source.integral(), rtol=1e-2)


def test_pushed_kappa_stays_positive(mesh, bump):
    kappa = ScalarField.constant(mesh, 2.0, role=FieldRole.KAPPA)
    pushed = pushforward_kappa(kappa, bump)
    assert pushed.values.min() > 0.0
    assert pushed.role is FieldRole.KAPPA


def test_energy_form_is_gauge_invariant(bump):
    gaps = []
    for h in (0.1, 0.05):
        mesh = build_disk_mesh(h)
        gamma = build_conductivity("exponential", alpha=0.5).tensor_field(mesh)
        trace = BoundaryData.from_function(mesh, lambda x, y: x * y + x)
        reference = energy_form(solve_conductivity(mesh, gamma, trace))
        pushed = energy_form(solve_conductivity(mesh, pushforward_tensor(gamma, bump), trace))
        gaps.append(abs(pushed - reference) / reference)
    assert gaps[-1] < 0.01
    assert gaps[-1] < gaps[0]


def test_pushforward_triple_maps_every_coefficient(mesh, bump):
    triple = CoefficientTriple(
        gamma=build_conductivity("gaussian").tensor_field(mesh),
        kappa=ScalarField.constant(mesh, 1.5, role=FieldRole.KAPPA),
        thermal=TensorField.identity(mesh, role=FieldRole.THERMAL),
    )
    pushed = pushforward_triple(triple, bump)
    assert pushed.mesh is mesh
    assert not np.allclose(pushed.thermal.values, triple.thermal.values)
    assert_allclose(pushed.gamma.values, pushforward_tensor(triple.gamma, bump).values)
