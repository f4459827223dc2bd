"""Boundary-fixing diffeomorphisms of the disk and coefficient pushforwards."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import LinearNDInterpolator

from .errors import DiffeomorphismError, ParameterError, SingularJacobianError
from .models import CoefficientTriple, Diffeomorphism, FieldRole, Mesh, ScalarField, TensorField
from .utils import bump_profile, get_logger

logger = get_logger(__name__)

AMPLITUDE_RATIO_MAX = 0.3
INVERSE_MAX_ITER = 100
INVERSE_TOL = 1e-12
ROUND_TRIP_TOL = 1e-8
SAMPLE_RESOLUTION = 41


def identity_diffeo() -> Diffeomorphism:
    def forward(points: np.ndarray) -> np.ndarray:
        return np.array(points, dtype=float)

    def jacobian(points: np.ndarray) -> np.ndarray:
        return np.broadcast_to(np.eye(2), (np.asarray(points).shape[0], 2, 2)).copy()

    return Diffeomorphism(forward=forward, inverse=forward, jacobian=jacobian, label="identity")


def disk_sample_points(resolution: int = SAMPLE_RESOLUTION) -> np.ndarray:
    """Cartesian sample grid restricted to the closed unit disk, plus boundary points."""

    axis = np.linspace(-1.0, 1.0, resolution)
    xx, yy = np.meshgrid(axis, axis)
    grid = np.column_stack((xx.ravel(), yy.ravel()))
    grid = grid[np.linalg.norm(grid, axis=1) < 1.0]
    angles = np.linspace(0.0, 2.0 * np.pi, 4 * resolution, endpoint=False)
    return np.vstack((grid, np.column_stack((np.cos(angles), np.sin(angles)))))


def make_bump_diffeo(
    center: Sequence[float],
    radius: float,
    amplitude: Sequence[float],
    *,
    sample_resolution: int = SAMPLE_RESOLUTION,
) -> Diffeomorphism:
    """Build ``F(x) = x + amplitude * eta(|x - center| / radius)``.

    Args:
        center: Bump centre; the disk ``|x - center| < radius`` must lie inside the unit disk.
        radius: Bump radius.
        amplitude: Displacement vector, at most ``0.3 * radius`` long.
        sample_resolution: Points per axis of the validation grid.

    Returns:
        Diffeomorphism equal to the identity outside the bump.

    Raises:
        ParameterError: If the bump is not strictly inside the disk.
        DiffeomorphismError: If the amplitude is too large or the sampled map fails validation.
    """

    c = np.asarray(center, dtype=float).reshape(2)
    a = np.asarray(amplitude, dtype=float).reshape(2)
    rho = float(radius)
    if rho <= 0.0 or np.linalg.norm(c) + rho >= 1.0:
        raise ParameterError(f"bump disk (center={c.tolist()}, radius={rho}) must lie strictly inside the unit disk")
    if np.linalg.norm(a) > AMPLITUDE_RATIO_MAX * rho:
        raise DiffeomorphismError(
            f"|amplitude|={np.linalg.norm(a):.4f} exceeds {AMPLITUDE_RATIO_MAX} * radius = {AMPLITUDE_RATIO_MAX * rho:.4f}"
        )

    def profile(points: np.ndarray) -> np.ndarray:
        return bump_profile(np.linalg.norm(points - c, axis=1) / rho)

    def forward(points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return points + profile(points)[:, None] * a

    def jacobian(points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        offset = points - c
        s2 = np.sum(offset * offset, axis=1) / (rho * rho)
        inside = s2 < 1.0
        denom = np.where(inside, 1.0 - s2, 1.0)
        # grad eta = eta(s) * (-2 / (rho^2 (1 - s^2)^2)) * (x - c)
        factor = np.where(inside, profile(points) * (-2.0 / (rho * rho * denom * denom)), 0.0)
        grad = factor[:, None] * offset
        return np.eye(2)[None, :, :] + a[None, :, None] * grad[:, None, :]

    def inverse(points: np.ndarray) -> np.ndarray:
        target = np.atleast_2d(np.asarray(points, dtype=float))
        guess = target.copy()
        for iteration in range(INVERSE_MAX_ITER):
            updated = target - profile(guess)[:, None] * a
            change = float(np.abs(updated - guess).max(initial=0.0))
            guess = updated
            if change <= INVERSE_TOL:
                break
        else:
            raise DiffeomorphismError(f"inverse iteration stalled after {INVERSE_MAX_ITER} steps (change {change:.2e})")
        logger.debug("Bump inverse converged in %d iterations", iteration + 1)
        return guess

    label = f"bump(c=({c[0]:.3g},{c[1]:.3g}),r={rho:.3g},a=({a[0]:.3g},{a[1]:.3g}))"
    diffeo = Diffeomorphism(forward=forward, inverse=inverse, jacobian=jacobian, label=label)
    _validate_diffeo(diffeo, disk_sample_points(sample_resolution))
    return diffeo


def _validate_diffeo(diffeo: Diffeomorphism, samples: np.ndarray) -> None:
    det = diffeo.determinant(samples)
    if det.min() <= 0.0:
        raise DiffeomorphismError(f"{diffeo.label}: jacobian determinant reaches {det.min():.3e} on the sample grid")
    round_trip = float(np.abs(diffeo.inverse(diffeo.forward(samples)) - samples).max())
    if round_trip > ROUND_TRIP_TOL:
        raise DiffeomorphismError(f"{diffeo.label}: inverse round trip error {round_trip:.2e}")
    boundary = samples[np.isclose(np.linalg.norm(samples, axis=1), 1.0)]
    moved = float(np.abs(diffeo.forward(boundary) - boundary).max(initial=0.0))
    if moved > 1e-10:
        raise DiffeomorphismError(f"{diffeo.label}: boundary moved by {moved:.2e}")


def random_bump_diffeo(rng: np.random.Generator, *, amplitude_ratio: float = 0.2) -> Diffeomorphism:
    """Draw a bump diffeomorphism with centre, radius and direction from ``rng``."""

    radius = float(rng.uniform(0.35, 0.55))
    center_radius = float(rng.uniform(0.0, 0.9 - radius))
    angle = float(rng.uniform(0.0, 2.0 * np.pi))
    direction = float(rng.uniform(0.0, 2.0 * np.pi))
    center = center_radius * np.array([np.cos(angle), np.sin(angle)])
    amplitude = amplitude_ratio * radius * np.array([np.cos(direction), np.sin(direction)])
    return make_bump_diffeo(center, radius, amplitude)


def compose(outer: Diffeomorphism, inner: Diffeomorphism) -> Diffeomorphism:
    """The composition ``outer o inner``."""

    def forward(points: np.ndarray) -> np.ndarray:
        return outer.forward(inner.forward(points))

    def inverse(points: np.ndarray) -> np.ndarray:
        return inner.inverse(outer.inverse(points))

    def jacobian(points: np.ndarray) -> np.ndarray:
        return outer.jacobian(inner.forward(points)) @ inner.jacobian(points)

    return Diffeomorphism(forward=forward, inverse=inverse, jacobian=jacobian, label=f"{outer.label}o{inner.label}")


def _values_at(mesh: Mesh, nodal: np.ndarray, evaluator, points: np.ndarray) -> np.ndarray:
    """Field values at arbitrary points: closed form when known, P1 interpolation otherwise."""

    if evaluator is not None:
        return np.asarray(evaluator(points), dtype=float)
    flat = np.asarray(nodal, dtype=float).reshape(mesh.n_nodes, -1)
    interpolated = LinearNDInterpolator(mesh.nodes, flat)(points)
    if np.any(np.isnan(interpolated)):
        raise ParameterError("pre-image points fall outside the triangulation")
    return interpolated.reshape((points.shape[0],) + np.shape(nodal)[1:])


def _preimages(mesh: Mesh, diffeo: Diffeomorphism) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    pre = diffeo.inverse(mesh.nodes)
    jac = diffeo.jacobian(pre)
    det = np.linalg.det(jac)
    if det.min() <= 0.0:
        raise SingularJacobianError(f"{diffeo.label}: |DF| = {det.min():.3e} at a pre-image node")
    return pre, jac, det


def _pulled(mesh: Mesh, nodal: np.ndarray, evaluator, pre: np.ndarray) -> np.ndarray:
    """Nodal field composed with the inverse map; nodes the map does not move keep their stored values."""

    values = np.array(nodal, dtype=float, copy=True)
    moved = np.any(pre != mesh.nodes, axis=1)
    if np.any(moved):
        values[moved] = _values_at(mesh, nodal, evaluator, pre[moved])
    return values


def _tensor_formula(jac: np.ndarray, tensor: np.ndarray, det: np.ndarray) -> np.ndarray:
    return jac @ tensor @ jac.transpose(0, 2, 1) / det[:, None, None]


def pushforward_tensor(tensor: TensorField, diffeo: Diffeomorphism) -> TensorField:
    """``F_* T = (DF T DF^T / |DF|) o F^-1`` evaluated at the nodes.

    Raises:
        SingularJacobianError: If ``|DF| <= 0`` at a pre-image.
    """

    mesh = tensor.mesh
    pre, jac, det = _preimages(mesh, diffeo)
    values = _tensor_formula(jac, _pulled(mesh, tensor.values, tensor.evaluator, pre), det)

    evaluator = None
    if tensor.evaluator is not None:
        base = tensor.evaluator

        def evaluator(points: np.ndarray) -> np.ndarray:
            origin = diffeo.inverse(points)
            jac_pts = diffeo.jacobian(origin)
            return _tensor_formula(jac_pts, base(origin), np.linalg.det(jac_pts))

    return TensorField(
        mesh=mesh,
        values=values,
        role=tensor.role,
        evaluator=evaluator,
        label=f"{diffeo.label}_*{tensor.label}",
    )


def _pushforward_scalar(field: ScalarField, diffeo: Diffeomorphism, power: float, role: Optional[FieldRole]) -> ScalarField:
    mesh = field.mesh
    pre, _, det = _preimages(mesh, diffeo)
    values = det ** power * _pulled(mesh, field.values, field.evaluator, pre)

    evaluator = None
    if field.evaluator is not None:
        base = field.evaluator

        def evaluator(points: np.ndarray) -> np.ndarray:
            origin = diffeo.inverse(points)
            return diffeo.determinant(origin) ** power * base(origin)

    return ScalarField(
        mesh=mesh,
        values=values,
        role=role or field.role,
        evaluator=evaluator,
        label=f"{diffeo.label}_*{field.label}",
    )


def pushforward_kappa(kappa: ScalarField, diffeo: Diffeomorphism) -> ScalarField:
    """``|DF(F^-1 x)| kappa(F^-1 x)``."""

    return _pushforward_scalar(kappa, diffeo, 1.0, None)


def pushforward_source(source: ScalarField, diffeo: Diffeomorphism) -> ScalarField:
    """``|DF(F^-1 x)|^-1 S(F^-1 x)``; preserves the integral of S."""

    return _pushforward_scalar(source, diffeo, -1.0, None)


def pushforward_triple(triple: CoefficientTriple, diffeo: Diffeomorphism) -> CoefficientTriple:
    """Push all three coefficients forward under the same map."""

    return CoefficientTriple(
        gamma=pushforward_tensor(triple.gamma, diffeo),
        kappa=pushforward_kappa(triple.kappa, diffeo),
        thermal=pushforward_tensor(triple.thermal, diffeo),
        label=f"{diffeo.label}_*{triple.label}",
    )


def determinant_defect(tensor: TensorField, diffeo: Diffeomorphism) -> float:
    """Max over nodes of ``|det(F_* T)(y) - det T(F^-1 y)|``; zero in two dimensions."""

    mesh = tensor.mesh
    pre, jac, det = _preimages(mesh, diffeo)
    original = _pulled(mesh, tensor.values, tensor.evaluator, pre)
    pushed = _tensor_formula(jac, original, det)
    return float(np.abs(np.linalg.det(pushed) - np.linalg.det(original)).max())


__all__ = [
    "identity_diffeo",
    "disk_sample_points",
    "make_bump_diffeo",
    "random_bump_diffeo",
    "compose",
    "pushforward_tensor",
    "pushforward_kappa",
    "pushforward_source",
    "pushforward_triple",
    "determinant_defect",
]
