"""Piecewise-linear finite element assembly on disk meshes."""

from __future__ import annotations

from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import SolverError
from .models import Mesh
from .utils import get_logger

logger = get_logger(__name__)

_LOCAL_MASS = (np.ones((3, 3)) + np.eye(3)) / 12.0


def assemble_local(mesh: Mesh, local: np.ndarray) -> sp.csr_matrix:
    """Sum per-triangle ``(T, 3, 3)`` blocks into a global sparse matrix."""

    rows = np.repeat(mesh.triangles, 3, axis=1).ravel()
    cols = np.tile(mesh.triangles, (1, 3)).ravel()
    matrix = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(mesh.n_nodes, mesh.n_nodes))
    return matrix.tocsr()


def stiffness_matrix(mesh: Mesh, tensor: np.ndarray) -> sp.csr_matrix:
    """Stiffness of ``-div(C grad)`` with C the nodal tensor averaged at centroids."""

    coefficient = mesh.centroid_values(tensor)
    grads = mesh.gradients
    local = mesh.areas[:, None, None] * np.einsum("tia,tab,tjb->tij", grads, coefficient, grads)
    return assemble_local(mesh, local)


def mass_matrix(mesh: Mesh, cell_weight: Optional[np.ndarray] = None) -> sp.csr_matrix:
    """Consistent P1 mass matrix with an optional per-triangle weight."""

    weight = mesh.areas if cell_weight is None else mesh.areas * np.asarray(cell_weight, dtype=float)
    local = weight[:, None, None] * _LOCAL_MASS[None, :, :]
    return assemble_local(mesh, local)


def inverse_weight_mass(mesh: Mesh, kappa: np.ndarray) -> sp.csr_matrix:
    """Mass matrix weighted by kappa^-1 sampled at triangle centroids."""

    return mass_matrix(mesh, 1.0 / mesh.centroid_values(kappa))


def cell_gradients(mesh: Mesh, nodal: np.ndarray) -> np.ndarray:
    """Constant gradient of the P1 interpolant on each triangle, shape ``(T, 2)``."""

    return np.einsum("tia,ti->ta", mesh.gradients, np.asarray(nodal, dtype=float)[mesh.triangles])


def cell_quadratic(mesh: Mesh, tensor: np.ndarray, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Per-triangle value of ``grad(left) . C grad(right)``."""

    coefficient = mesh.centroid_values(tensor)
    return np.einsum(
        "ta,tab,tb->t", cell_gradients(mesh, left), coefficient, cell_gradients(mesh, right)
    )


class DirichletSystem:
    """Interior block of a matrix, factorized once, for repeated Dirichlet solves."""

    def __init__(self, mesh: Mesh, matrix: sp.spmatrix) -> None:
        self.mesh = mesh
        self.matrix = sp.csr_matrix(matrix)
        self._interior = mesh.interior_nodes
        self._boundary = mesh.boundary_nodes
        self.interior_block = self.matrix[self._interior][:, self._interior].tocsc()
        self.coupling = self.matrix[self._interior][:, self._boundary].tocsr()
        try:
            self._factor = splu(self.interior_block)
        except RuntimeError as exc:
            raise SolverError(
                f"interior matrix of size {self.interior_block.shape[0]} is singular: {exc}"
            ) from exc
        logger.debug("Factorized interior block with %d unknowns", self.interior_block.shape[0])

    def solve(self, rhs: Optional[np.ndarray] = None, boundary_values: Optional[np.ndarray] = None) -> np.ndarray:
        """Return nodal x with ``x[boundary] = boundary_values`` and interior rows of ``A x = rhs``."""

        mesh = self.mesh
        solution = np.zeros(mesh.n_nodes)
        interior_rhs = np.zeros(self._interior.size)
        if rhs is not None:
            interior_rhs += np.asarray(rhs)[self._interior]
        if boundary_values is not None:
            solution[self._boundary] = boundary_values
            interior_rhs -= self.coupling @ np.asarray(boundary_values, dtype=float)
        solution[self._interior] = self._factor.solve(interior_rhs)
        if not np.all(np.isfinite(solution)):
            raise SolverError("sparse solve produced non-finite values")
        return solution

    def solve_interior(self, interior_rhs: np.ndarray) -> np.ndarray:
        return self._factor.solve(np.asarray(interior_rhs, dtype=float))


def boundary_residual_flux(mesh: Mesh, residual: np.ndarray) -> np.ndarray:
    """Consistent flux: residual at the boundary hat functions over the lumped arc weights."""

    return np.asarray(residual)[mesh.boundary_nodes] / mesh.boundary_weights


__all__ = [
    "assemble_local",
    "stiffness_matrix",
    "mass_matrix",
    "inverse_weight_mass",
    "cell_gradients",
    "cell_quadratic",
    "DirichletSystem",
    "boundary_residual_flux",
]
