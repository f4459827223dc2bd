import numpy as np
import pytest

from electroheat.catalog import build_conductivity
from electroheat.density import (
    RESIDUAL_CSV_HEADER,
    build_family,
    cell_values,
    orthogonality_defect,
    orthogonalize,
    orthogonalized_decay,
    projection_residual,
    pushforward_weight,
    residual_table,
    trig_traces,
    write_residual_csv,
)
from electroheat.errors import ParameterError
from electroheat.geometry import make_bump_diffeo
from electroheat.models import TensorField


def r2(points):
    return points[:, 0] ** 2 + points[:, 1] ** 2


@pytest.fixture(scope="module")
def family(mesh):
    return build_family(mesh, TensorField.identity(mesh), 3)


def test_trig_traces(coarse_mesh):
    labels = [trace.label for trace in trig_traces(coarse_mesh, 2)]
    assert labels == ["1", "cos1", "sin1", "cos2", "sin2"]
    with pytest.raises(ParameterError):
        trig_traces(coarse_mesh, 25)


def test_family_layout(family):
    assert family.size == 7 * 8 // 2
    assert family.pairs[0] == (0, 0)
    assert family.labels[family.pairs.index((1, 2))] == "cos1*sin1"
    # the constant trace has a zero gradient
    assert np.abs(family.cells[0]).max() < 1e-20


def test_gram_is_positive_semidefinite(family):
    eigenvalues = family.gram_eigenvalues()
    assert eigenvalues.min() >= -1e-10 * eigenvalues.max()


@pytest.mark.parametrize("catalog", ["constant", "gaussian"])
def test_diagonal_products_are_nonnegative(coarse_mesh, catalog):
    gamma = build_conductivity(catalog, **({"amplitude": 0.2} if catalog == "gaussian" else {})).tensor_field(coarse_mesh)
    family = build_family(coarse_mesh, gamma, 3)
    diagonal = [index for index, (i, j) in enumerate(family.pairs) if i == j]
    assert len(diagonal) == 7
    assert family.cells[diagonal].min() >= 0.0


def test_members_lie_in_the_span(family):
    index = family.pairs.index((1, 3))
    assert projection_residual(family.cells[index], family) < 1e-6
    member = family.member(index)
    assert member.values.shape == (family.mesh.n_nodes,)


def test_radius_squared_is_reached_at_order_two(mesh):
    gamma = TensorField.identity(mesh)
    rows = residual_table(mesh, gamma, {"r2": r2, "x": lambda p: p[:, 0]}, [0, 1, 2, 3])
    by_target = {}
    for row in rows:
        by_target.setdefault(row.target_id, []).append(row.residual)
    for values in by_target.values():
        assert np.all(np.diff(values) <= 1e-8)
    assert by_target["r2"][0] == 1.0
    assert by_target["r2"][2] < 0.1


def test_residual_is_monotone_for_a_variable_conductivity(coarse_mesh):
    gamma = build_conductivity("gaussian", amplitude=0.2, width=0.5).tensor_field(coarse_mesh)
    rows = residual_table(coarse_mesh, gamma, {"bump": lambda p: np.exp(-4.0 * r2(p))}, range(1, 5))
    residuals = [row.residual for row in rows]
    assert np.all(np.diff(residuals) <= 1e-8)


def test_zero_target_has_zero_residual(family):
    assert projection_residual(np.zeros(family.mesh.n_triangles), family) == 0.0


def test_target_shapes(mesh):
    assert cell_values(mesh, np.ones(mesh.n_nodes)).shape == (mesh.n_triangles,)
    with pytest.raises(ParameterError):
        cell_values(mesh, np.ones(3))


def test_orthogonalized_field_is_orthogonal(family):
    mesh = family.mesh
    seed = cell_values(mesh, lambda p: (p[:, 0] > 0.0).astype(float))
    projected = orthogonalize(seed, family)
    assert orthogonality_defect(projected, family) < 1e-8
    assert orthogonality_defect(seed, family) > 1e-3


def test_weight_must_be_positive(family):
    with pytest.raises(ParameterError):
        projection_residual(r2, family, weight=-np.ones(family.mesh.n_nodes))


def test_pushforward_weight_is_positive(mesh):
    diffeo = make_bump_diffeo(center=(0.0, 0.2), radius=0.5, amplitude=(0.05, 0.0))
    weight = pushforward_weight(mesh, diffeo)
    assert weight.min() > 0.0
    assert np.allclose(weight[mesh.boundary_nodes], 1.0)


def test_member_seed_is_degenerate(family, grid):
    seed = family.cells[family.pairs.index((1, 1))]
    decay = orthogonalized_decay(family, seed, [10.0, 20.0], grid=grid)
    assert decay.degenerate
    assert decay.gap is None
    assert decay.notes
    assert len(decay.seed.rows) == 2


def test_zero_seed_is_rejected(family, grid):
    with pytest.raises(ParameterError):
        orthogonalized_decay(family, np.zeros(family.mesh.n_triangles), [10.0], grid=grid)


def test_residual_csv(tmp_path, coarse_mesh):
    rows = residual_table(coarse_mesh, TensorField.identity(coarse_mesh), {"x": lambda p: p[:, 0]}, [1, 2])
    lines = write_residual_csv(tmp_path / "residuals.csv", rows).read_text().splitlines()
    assert lines[0] == RESIDUAL_CSV_HEADER
    assert lines[1].startswith("1,x,")
