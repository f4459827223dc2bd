"""Conductivity equation: Dirichlet solves, DN map, energy and Liouville transform."""

from __future__ import annotations

from typing import Iterable, List

import numpy as np

from .catalog import ClosedFormConductivity
from .errors import DomainError, ParameterError
from .fem import DirichletSystem, boundary_residual_flux, cell_quadratic, mass_matrix, stiffness_matrix
from .models import BoundaryData, FieldRole, FluxTrace, Mesh, ScalarField, TensorField, VoltageField
from .utils import get_logger

logger = get_logger(__name__)


class ConductivitySolver:
    """Factorized stiffness of ``div(gamma grad u) = 0`` for many boundary data."""

    def __init__(self, gamma: TensorField) -> None:
        self.gamma = gamma
        self.mesh = gamma.mesh
        self.stiffness = stiffness_matrix(self.mesh, gamma.values)
        self._system = DirichletSystem(self.mesh, self.stiffness)

    def solve(self, boundary: BoundaryData) -> VoltageField:
        if boundary.mesh is not self.mesh:
            raise ParameterError("boundary data lives on a different mesh")
        values = self._system.solve(boundary_values=boundary.values)
        return VoltageField(mesh=self.mesh, values=values, boundary=boundary, gamma=self.gamma)

    def solve_many(self, boundaries: Iterable[BoundaryData]) -> List[VoltageField]:
        return [self.solve(boundary) for boundary in boundaries]


def solve_conductivity(mesh: Mesh, gamma: TensorField, f: BoundaryData) -> VoltageField:
    """P1 solution of ``div(gamma grad u) = 0`` with ``u = f`` on the boundary.

    The trace is imposed by elimination, so boundary values equal ``f`` exactly.

    Raises:
        ParameterError: If the inputs live on different meshes.
        SolverError: If the interior stiffness block cannot be factorized.
    """

    if gamma.mesh is not mesh:
        raise ParameterError("gamma lives on a different mesh")
    voltage = ConductivitySolver(gamma).solve(f)
    logger.debug("Solved conductivity equation for %s on %d nodes", f.label or "boundary data", mesh.n_nodes)
    return voltage


def _stiffness_residual(u: VoltageField) -> np.ndarray:
    return stiffness_matrix(u.mesh, u.gamma.values) @ u.values


def dn_map(u: VoltageField) -> FluxTrace:
    """Consistent conormal flux ``nu . gamma grad u`` at the boundary nodes."""

    mesh = u.mesh
    values = boundary_residual_flux(mesh, _stiffness_residual(u))
    return FluxTrace(mesh=mesh, values=values, weights=mesh.boundary_weights, label=f"DN({u.boundary.label})")


def dn_pairing(mesh: Mesh, gamma: TensorField, f: BoundaryData, g: BoundaryData) -> float:
    """``<Lambda f, g>`` on the boundary; symmetric in ``f`` and ``g``."""

    return dn_map(solve_conductivity(mesh, gamma, f)).pairing(g)


def energy_form(u: VoltageField) -> float:
    """``Q_gamma(f) = int grad u . gamma grad u``."""

    value = float(u.values @ _stiffness_residual(u))
    return max(value, 0.0)


def energy_density(u: VoltageField) -> ScalarField:
    """Joule density ``grad u . gamma grad u`` projected to the nodes by area weighting."""

    mesh = u.mesh
    cells = cell_quadratic(mesh, u.gamma.values, u.values, u.values)
    return ScalarField(
        mesh=mesh,
        values=mesh.cell_to_node(np.maximum(cells, 0.0)),
        role=FieldRole.SOURCE,
        label=f"S({u.boundary.label})",
    )


def _closed_form(gamma_scalar: ScalarField) -> ClosedFormConductivity:
    closed = gamma_scalar.closed_form
    if not isinstance(closed, ClosedFormConductivity):
        raise ParameterError(
            f"field '{gamma_scalar.label}' has no closed form; the Liouville potential needs a catalog conductivity"
        )
    if gamma_scalar.values.min() <= 0.0:
        raise DomainError(f"conductivity '{gamma_scalar.label}' is not strictly positive")
    return closed


def liouville_potential(gamma_scalar: ScalarField) -> ScalarField:
    """``q = lap(sqrt(gamma)) / sqrt(gamma)`` sampled at the mesh nodes.

    Raises:
        ParameterError: If the field carries no closed-form expression.
        DomainError: If gamma is not strictly positive.
    """

    closed = _closed_form(gamma_scalar)
    return ScalarField.from_function(
        gamma_scalar.mesh,
        closed.potential,
        label=f"q({closed.label})",
        closed_form=closed.potential_expr,
    )


def liouville_residual(u: VoltageField, conductivity: ClosedFormConductivity) -> float:
    """Relative weak residual of ``(-lap + q)(sqrt(gamma) u)``.

    Dual norm of the interior residual against the Laplace stiffness, divided by
    the energy norm of ``sqrt(gamma) u``.
    """

    mesh = u.mesh
    transformed = conductivity.sqrt_gamma(mesh.nodes) * u.values
    laplace = stiffness_matrix(mesh, np.broadcast_to(np.eye(2), (mesh.n_nodes, 2, 2)))
    potential = conductivity.potential(mesh.centroids)
    residual = laplace @ transformed + mass_matrix(mesh, potential) @ transformed
    interior = mesh.interior_nodes
    system = DirichletSystem(mesh, laplace)
    dual = float(np.sqrt(max(residual[interior] @ system.solve_interior(residual[interior]), 0.0)))
    scale = float(np.sqrt(max(transformed @ (laplace @ transformed), 0.0)))
    if scale == 0.0:
        return 0.0
    return dual / scale


__all__ = [
    "ConductivitySolver",
    "solve_conductivity",
    "dn_map",
    "dn_pairing",
    "energy_form",
    "energy_density",
    "liouville_potential",
    "liouville_residual",
]
