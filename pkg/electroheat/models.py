"""Data models for electroheat."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np

from .errors import ParameterError

PointMap = Callable[[np.ndarray], np.ndarray]

SYMMETRY_TOL = 1e-12


def _frozen_array(values: Any, dtype: Any = float) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


class FieldRole(str, Enum):
    """Physical role of a coefficient field."""

    GENERIC = "generic"
    CONDUCTIVITY = "conductivity"
    KAPPA = "kappa"
    THERMAL = "thermal"
    SOURCE = "source"
    DENSITY = "density"


class SourceKind(str, Enum):
    """Supported shapes of a heat source history."""

    STATIC = "static"
    SEPARABLE = "separable"
    GENERAL = "general"


@dataclass(frozen=True, eq=False)
class Mesh:
    """Triangulation of the unit disk with an ordered boundary loop."""

    nodes: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    h_target: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", _frozen_array(self.nodes, float))
        object.__setattr__(self, "triangles", _frozen_array(self.triangles, np.int64))
        object.__setattr__(self, "boundary_edges", _frozen_array(self.boundary_edges, np.int64))

    @property
    def n_nodes(self) -> int:
        return int(self.nodes.shape[0])

    @property
    def n_triangles(self) -> int:
        return int(self.triangles.shape[0])

    @cached_property
    def areas(self) -> np.ndarray:
        """Signed triangle areas."""

        p0, p1, p2 = (self.nodes[self.triangles[:, i]] for i in range(3))
        d1 = p1 - p0
        d2 = p2 - p0
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    @cached_property
    def gradients(self) -> np.ndarray:
        """Gradients of the barycentric hat functions, shape ``(T, 3, 2)``."""

        xy = self.nodes[self.triangles]
        grads = np.empty((self.n_triangles, 3, 2))
        for i in range(3):
            j, k = (i + 1) % 3, (i + 2) % 3
            grads[:, i, 0] = xy[:, j, 1] - xy[:, k, 1]
            grads[:, i, 1] = xy[:, k, 0] - xy[:, j, 0]
        return grads / (2.0 * self.areas)[:, None, None]

    @cached_property
    def centroids(self) -> np.ndarray:
        return self.nodes[self.triangles].mean(axis=1)

    @cached_property
    def node_areas(self) -> np.ndarray:
        """Lumped quadrature weights: a third of each adjacent triangle area."""

        weights = np.zeros(self.n_nodes)
        np.add.at(weights, self.triangles.ravel(), np.repeat(self.areas / 3.0, 3))
        return weights

    @cached_property
    def boundary_nodes(self) -> np.ndarray:
        """Boundary node indices in loop order."""

        return self.boundary_edges[:, 0].copy()

    @cached_property
    def interior_nodes(self) -> np.ndarray:
        mask = np.ones(self.n_nodes, dtype=bool)
        mask[self.boundary_nodes] = False
        return np.flatnonzero(mask)

    @cached_property
    def boundary_edge_lengths(self) -> np.ndarray:
        start = self.nodes[self.boundary_edges[:, 0]]
        end = self.nodes[self.boundary_edges[:, 1]]
        return np.linalg.norm(end - start, axis=1)

    @cached_property
    def boundary_weights(self) -> np.ndarray:
        """Lumped arc weights (half of each adjacent boundary edge), loop order."""

        lengths = self.boundary_edge_lengths
        return 0.5 * (lengths + np.roll(lengths, 1))

    @cached_property
    def arc_coordinates(self) -> np.ndarray:
        """Arc length from the first loop node to each boundary node."""

        return np.concatenate(([0.0], np.cumsum(self.boundary_edge_lengths)[:-1]))

    def centroid_values(self, nodal: np.ndarray) -> np.ndarray:
        """Average nodal values (scalar or tensor) over each triangle."""

        return np.asarray(nodal)[self.triangles].mean(axis=1)

    def cell_to_node(self, cell_values: np.ndarray) -> np.ndarray:
        """Area-weighted average of per-triangle values onto the nodes."""

        totals = np.zeros(self.n_nodes)
        np.add.at(totals, self.triangles.ravel(), np.repeat(self.areas * cell_values, 3))
        return totals / (3.0 * self.node_areas)

    def integrate(self, nodal: np.ndarray) -> float:
        """Exact integral of the piecewise-linear interpolant."""

        return float(self.node_areas @ np.asarray(nodal, dtype=float))

    def evaluate(self, func: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> np.ndarray:
        return np.asarray(func(self.nodes[:, 0], self.nodes[:, 1]), dtype=float)


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Per-node scalar coefficient field."""

    mesh: Mesh
    values: np.ndarray
    role: FieldRole = FieldRole.GENERIC
    evaluator: Optional[PointMap] = None
    closed_form: Optional[Any] = None
    label: str = ""

    def __post_init__(self) -> None:
        values = _frozen_array(self.values, float)
        if values.shape != (self.mesh.n_nodes,):
            raise ParameterError(
                f"scalar field needs {self.mesh.n_nodes} nodal values, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ParameterError(f"scalar field '{self.label}' has non-finite values")
        if self.role is FieldRole.KAPPA and values.min() <= 0.0:
            raise ParameterError(f"kappa field '{self.label}' must be positive, min={values.min():.3e}")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(
        cls,
        mesh: Mesh,
        func: PointMap,
        *,
        role: FieldRole = FieldRole.GENERIC,
        label: str = "",
        closed_form: Optional[Any] = None,
    ) -> "ScalarField":
        """Sample ``func`` (points ``(m, 2)`` to values ``(m,)``) at the nodes and keep it as evaluator."""

        return cls(
            mesh=mesh,
            values=np.asarray(func(mesh.nodes), dtype=float),
            role=role,
            evaluator=func,
            closed_form=closed_form,
            label=label,
        )

    @classmethod
    def constant(cls, mesh: Mesh, value: float, *, role: FieldRole = FieldRole.GENERIC, label: str = "") -> "ScalarField":
        def evaluator(points: np.ndarray) -> np.ndarray:
            return np.full(np.asarray(points).shape[0], float(value))

        return cls.from_function(mesh, evaluator, role=role, label=label or f"const({value:g})")

    def scaled(self, factor: float, label: str = "") -> "ScalarField":
        evaluator = None
        if self.evaluator is not None:
            base = self.evaluator

            def evaluator(points: np.ndarray) -> np.ndarray:
                return factor * base(points)

        closed_form = self.closed_form
        if hasattr(closed_form, "scaled"):
            # a non-positive multiple of a conductivity has no conductivity closed form
            closed_form = closed_form.scaled(factor) if factor > 0.0 else None
        elif closed_form is not None:
            closed_form = factor * closed_form

        return ScalarField(
            mesh=self.mesh,
            values=factor * self.values,
            role=self.role,
            evaluator=evaluator,
            closed_form=closed_form,
            label=label or f"{factor:g}*{self.label}",
        )

    def integral(self) -> float:
        return self.mesh.integrate(self.values)


@dataclass(frozen=True, eq=False)
class TensorField:
    """Per-node symmetric positive definite 2x2 field."""

    mesh: Mesh
    values: np.ndarray
    lower_bound: float = 0.0
    role: FieldRole = FieldRole.CONDUCTIVITY
    evaluator: Optional[PointMap] = None
    label: str = ""

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.shape != (self.mesh.n_nodes, 2, 2):
            raise ParameterError(
                f"tensor field needs shape ({self.mesh.n_nodes}, 2, 2), got {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ParameterError(f"tensor field '{self.label}' has non-finite values")
        scale = max(1.0, float(np.abs(values).max()))
        asymmetry = float(np.abs(values - values.transpose(0, 2, 1)).max())
        if asymmetry > SYMMETRY_TOL * scale:
            raise ParameterError(f"tensor field '{self.label}' is not symmetric (defect {asymmetry:.2e})")
        values = 0.5 * (values + values.transpose(0, 2, 1))
        smallest = float(np.linalg.eigvalsh(values)[:, 0].min())
        if smallest <= 0.0 or smallest < self.lower_bound:
            raise ParameterError(
                f"tensor field '{self.label}' is not uniformly positive definite "
                f"(min eigenvalue {smallest:.3e}, declared bound {self.lower_bound:.3e})"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def isotropic(cls, scalar: ScalarField, *, role: FieldRole = FieldRole.CONDUCTIVITY, label: str = "") -> "TensorField":
        """Scalar field times the identity, keeping the scalar's evaluator."""

        evaluator = None
        if scalar.evaluator is not None:
            base = scalar.evaluator

            def evaluator(points: np.ndarray) -> np.ndarray:
                return base(points)[:, None, None] * np.eye(2)

        return cls(
            mesh=scalar.mesh,
            values=scalar.values[:, None, None] * np.eye(2),
            role=role,
            evaluator=evaluator,
            label=label or scalar.label,
        )

    @classmethod
    def identity(cls, mesh: Mesh, *, role: FieldRole = FieldRole.CONDUCTIVITY) -> "TensorField":
        return cls.isotropic(ScalarField.constant(mesh, 1.0), role=role, label="I")

    @cached_property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.values)[:, 0].min())


@dataclass(frozen=True, eq=False)
class CoefficientTriple:
    """The unknowns (gamma, kappa, A) on one mesh."""

    gamma: TensorField
    kappa: ScalarField
    thermal: TensorField
    label: str = "triple"

    def __post_init__(self) -> None:
        mesh = self.gamma.mesh
        if self.kappa.mesh is not mesh or self.thermal.mesh is not mesh:
            raise ParameterError("gamma, kappa and thermal must live on the same mesh")
        if self.kappa.values.min() <= 0.0:
            raise ParameterError("kappa must be strictly positive")

    @property
    def mesh(self) -> Mesh:
        return self.gamma.mesh

    @classmethod
    def unit(cls, mesh: Mesh) -> "CoefficientTriple":
        """gamma = A = I and kappa = 1."""

        return cls(
            gamma=TensorField.identity(mesh),
            kappa=ScalarField.constant(mesh, 1.0, role=FieldRole.KAPPA, label="kappa=1"),
            thermal=TensorField.identity(mesh, role=FieldRole.THERMAL),
            label="unit",
        )


@dataclass(frozen=True, eq=False)
class Diffeomorphism:
    """Smooth self-map of the closed disk with closed-form inverse and jacobian."""

    forward: PointMap
    inverse: PointMap
    jacobian: PointMap
    label: str = "diffeo"

    def determinant(self, points: np.ndarray) -> np.ndarray:
        return np.linalg.det(self.jacobian(np.atleast_2d(points)))


@dataclass(frozen=True, eq=False)
class BoundaryData:
    """Dirichlet values on the boundary loop, in loop order."""

    mesh: Mesh
    values: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        values = _frozen_array(self.values, float)
        expected = (self.mesh.boundary_nodes.size,)
        if values.shape != expected:
            raise ParameterError(f"boundary data needs shape {expected}, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ParameterError(f"boundary data '{self.label}' has non-finite values")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, mesh: Mesh, func: Callable[[np.ndarray, np.ndarray], np.ndarray], label: str = "") -> "BoundaryData":
        points = mesh.nodes[mesh.boundary_nodes]
        values = np.broadcast_to(np.asarray(func(points[:, 0], points[:, 1]), dtype=float), (points.shape[0],))
        return cls(mesh=mesh, values=values, label=label)

    def scaled(self, factor: float) -> "BoundaryData":
        return BoundaryData(self.mesh, factor * self.values, label=f"{factor:g}*{self.label}")

    def __add__(self, other: "BoundaryData") -> "BoundaryData":
        return BoundaryData(self.mesh, self.values + other.values, label=f"({self.label}+{other.label})")

    def __sub__(self, other: "BoundaryData") -> "BoundaryData":
        return BoundaryData(self.mesh, self.values - other.values, label=f"({self.label}-{other.label})")


@dataclass(frozen=True, eq=False)
class VoltageField:
    """Solution of the conductivity equation with its generating data."""

    mesh: Mesh
    values: np.ndarray
    boundary: BoundaryData
    gamma: TensorField

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _frozen_array(self.values, float))


@dataclass(frozen=True, eq=False)
class FluxTrace:
    """Conormal derivative on the boundary loop with its integration weights."""

    mesh: Mesh
    values: np.ndarray
    weights: np.ndarray
    time: Optional[float] = None
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _frozen_array(self.values, float))
        object.__setattr__(self, "weights", _frozen_array(self.weights, float))

    def integral(self) -> float:
        """Boundary integral of the flux."""

        return float(self.weights @ self.values)

    def pairing(self, boundary: BoundaryData) -> float:
        return float(self.weights @ (self.values * boundary.values))


@dataclass(frozen=True, eq=False)
class TemperatureField:
    """Nodal temperature history on a time grid."""

    mesh: Mesh
    times: np.ndarray
    values: np.ndarray
    truncation_estimate: float = 0.0
    notes: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        times = _frozen_array(self.times, float)
        values = _frozen_array(self.values, float)
        if values.shape != (times.size, self.mesh.n_nodes):
            raise ParameterError(
                f"temperature history needs shape ({times.size}, {self.mesh.n_nodes}), got {values.shape}"
            )
        if np.any(np.diff(times) <= 0.0):
            raise ParameterError("time grid must be strictly increasing")
        if np.abs(values[:, self.mesh.boundary_nodes]).max(initial=0.0) != 0.0:
            raise ParameterError("boundary temperature must stay at zero")
        if times[0] == 0.0 and np.abs(values[0]).max(initial=0.0) != 0.0:
            raise ParameterError("temperature must vanish at t = 0")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def at(self, index: int) -> np.ndarray:
        return self.values[index]


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Eigenpairs of -kappa div(A grad) orthonormal in the kappa^-1 weighted product."""

    mesh: Mesh
    eigenvalues: np.ndarray
    vectors: np.ndarray
    interior: np.ndarray
    stiffness: Any
    mass: Any
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "eigenvalues", _frozen_array(self.eigenvalues, float))
        object.__setattr__(self, "vectors", _frozen_array(self.vectors, float))
        object.__setattr__(self, "interior", _frozen_array(self.interior, np.int64))

    @property
    def n_modes(self) -> int:
        return int(self.eigenvalues.size)

    def to_nodal(self, interior_values: np.ndarray) -> np.ndarray:
        """Embed interior values (or a stack of them, last axis) into nodal arrays with zero boundary."""

        interior_values = np.asarray(interior_values)
        shape = interior_values.shape[:-1] + (self.mesh.n_nodes,)
        nodal = np.zeros(shape)
        nodal[..., self.interior] = interior_values
        return nodal

    def gram(self) -> np.ndarray:
        """Gram matrix of the eigenvectors in the kappa^-1 weighted product."""

        return self.vectors.T @ (self.mass @ self.vectors)


@dataclass(frozen=True, eq=False)
class SourceHistory:
    """Heat source: static field, separable w(x) g(t), or a general per-time stack."""

    kind: SourceKind
    mesh: Mesh
    spatial: Optional[ScalarField] = None
    profile: Optional[np.ndarray] = None
    times: Optional[np.ndarray] = None
    fields: Optional[np.ndarray] = None
    label: str = ""

    def __post_init__(self) -> None:
        if self.kind in (SourceKind.STATIC, SourceKind.SEPARABLE) and self.spatial is None:
            raise ParameterError(f"{self.kind.value} source needs a spatial field")
        if self.kind is SourceKind.SEPARABLE:
            if self.profile is None or self.times is None:
                raise ParameterError("separable source needs a tabulated time profile")
            profile = _frozen_array(self.profile, float)
            times = _frozen_array(self.times, float)
            if profile.shape != times.shape:
                raise ParameterError("time profile and its grid differ in length")
            object.__setattr__(self, "profile", profile)
            object.__setattr__(self, "times", times)
        if self.kind is SourceKind.GENERAL:
            if self.fields is None or self.times is None:
                raise ParameterError("general source needs per-time fields and their grid")
            fields = _frozen_array(self.fields, float)
            times = _frozen_array(self.times, float)
            if fields.shape != (times.size, self.mesh.n_nodes):
                raise ParameterError("general source fields do not match the time grid")
            object.__setattr__(self, "fields", fields)
            object.__setattr__(self, "times", times)

    @classmethod
    def static(cls, field_: ScalarField, label: str = "") -> "SourceHistory":
        return cls(kind=SourceKind.STATIC, mesh=field_.mesh, spatial=field_, label=label or field_.label)

    @classmethod
    def separable(cls, field_: ScalarField, profile: np.ndarray, times: np.ndarray, label: str = "") -> "SourceHistory":
        return cls(
            kind=SourceKind.SEPARABLE,
            mesh=field_.mesh,
            spatial=field_,
            profile=profile,
            times=times,
            label=label or field_.label,
        )

    @classmethod
    def general(cls, mesh: Mesh, fields: np.ndarray, times: np.ndarray, label: str = "") -> "SourceHistory":
        return cls(kind=SourceKind.GENERAL, mesh=mesh, fields=fields, times=times, label=label)

    def require_grid(self, times: np.ndarray) -> None:
        """Check that a tabulated source matches the consuming time grid."""

        if self.kind is SourceKind.STATIC:
            return
        assert self.times is not None
        if self.times.shape != np.shape(times) or not np.allclose(self.times, times, rtol=0.0, atol=1e-12):
            raise ParameterError("source time grid does not match the solver time grid")

    def profile_values(self, times: np.ndarray) -> np.ndarray:
        """g(t) on the grid; ones for a static source."""

        if self.kind is SourceKind.STATIC:
            return np.ones(np.shape(times))
        if self.kind is SourceKind.SEPARABLE:
            self.require_grid(times)
            assert self.profile is not None
            return np.asarray(self.profile)
        raise ParameterError("a general source has no separable time profile")

    def nodal(self, index: int) -> np.ndarray:
        """Source values at the ``index``-th grid time."""

        if self.kind is SourceKind.STATIC:
            assert self.spatial is not None
            return np.asarray(self.spatial.values)
        if self.kind is SourceKind.SEPARABLE:
            assert self.spatial is not None and self.profile is not None
            return self.profile[index] * np.asarray(self.spatial.values)
        assert self.fields is not None
        return np.asarray(self.fields[index])

    def scaled(self, factor: float) -> "SourceHistory":
        if self.kind is SourceKind.GENERAL:
            assert self.fields is not None and self.times is not None
            return SourceHistory.general(self.mesh, factor * self.fields, self.times, label=self.label)
        assert self.spatial is not None
        spatial = self.spatial.scaled(factor)
        if self.kind is SourceKind.STATIC:
            return SourceHistory.static(spatial, label=self.label)
        assert self.profile is not None and self.times is not None
        return SourceHistory.separable(spatial, self.profile, self.times, label=self.label)


@dataclass(frozen=True, eq=False)
class ExcitationSchedule:
    """Boundary voltage f(x, t) = h(x) g(t), or the static case g = 1."""

    profile: BoundaryData
    g: Optional[np.ndarray] = None
    times: Optional[np.ndarray] = None
    static: bool = True
    label: str = ""

    def __post_init__(self) -> None:
        if self.static:
            if self.g is not None and not np.all(np.asarray(self.g) == 1.0):
                raise ParameterError("a static schedule has g = 1")
            return
        if self.g is None or self.times is None:
            raise ParameterError("a time-dependent schedule needs g tabulated on its grid")
        g = _frozen_array(self.g, float)
        times = _frozen_array(self.times, float)
        if g.shape != times.shape:
            raise ParameterError("schedule profile and grid differ in length")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "times", times)

    def profile_on(self, times: np.ndarray) -> np.ndarray:
        if self.static:
            return np.ones(np.shape(times))
        assert self.times is not None and self.g is not None
        if self.times.shape != np.shape(times) or not np.allclose(self.times, times, rtol=0.0, atol=1e-12):
            raise ParameterError("schedule time grid does not match the measurement grid")
        return np.asarray(self.g)


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    """Boundary heat-flow history produced by the voltage-to-heat-flow map."""

    times: np.ndarray
    fluxes: Tuple[FluxTrace, ...]
    triple_id: str
    schedule_id: str
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def mesh(self) -> Mesh:
        return self.fluxes[0].mesh

    def flux_matrix(self) -> np.ndarray:
        """Flux values stacked as ``(n_times, n_boundary)``."""

        return np.stack([trace.values for trace in self.fluxes])

    def integrated(self) -> np.ndarray:
        return np.array([trace.integral() for trace in self.fluxes])


__all__ = [
    "FieldRole",
    "SourceKind",
    "Mesh",
    "ScalarField",
    "TensorField",
    "CoefficientTriple",
    "Diffeomorphism",
    "BoundaryData",
    "VoltageField",
    "FluxTrace",
    "TemperatureField",
    "EigenDecomposition",
    "SourceHistory",
    "ExcitationSchedule",
    "MeasurementRecord",
]
