"""Closed-form isotropic conductivities with symbolic Liouville potentials.

Each entry stores ``sqrt(gamma)`` as a sympy expression in ``x, y``. Derivatives
are taken symbolically and compiled with ``lambdify``; the potential
``q = lap(sqrt(gamma)) / sqrt(gamma)`` is therefore exact up to floating point.
For spectral work the conductivity is blended to 1 across the collar
``1 <= |x| <= 1.3`` so that ``q`` has compact support.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Dict, Mapping, Tuple

import numpy as np
import sympy as sp
from scipy.special import expit

from .errors import DomainError, ParameterError
from .models import FieldRole, Mesh, ScalarField, TensorField
from .utils import get_logger, radial_cutoff

logger = get_logger(__name__)

X, Y = sp.symbols("x y", real=True)

COLLAR_INNER = 1.0
COLLAR_OUTER = 1.3
K_MIN_FACTOR = 8.0

_Compiled = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _compile(expr: sp.Expr) -> _Compiled:
    raw = sp.lambdify((X, Y), expr, modules="numpy")

    def evaluate(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.asarray(raw(x, np.asarray(y, dtype=float)), dtype=float), x.shape).copy()

    return evaluate


def _cutoff_derivatives(radius: np.ndarray, inner: float, outer: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Radial cutoff psi(r) with its first two r-derivatives.

    ``psi = expit(e)`` with ``e = 1/(1-t) - 1/t`` and ``t = (outer - r) / width``.
    """

    width = outer - inner
    t = (outer - np.asarray(radius, dtype=float)) / width
    inside = (t > 0.0) & (t < 1.0)
    ts = np.where(inside, t, 0.5)
    e = 1.0 / (1.0 - ts) - 1.0 / ts
    de = 1.0 / (1.0 - ts) ** 2 + 1.0 / ts**2
    d2e = 2.0 / (1.0 - ts) ** 3 - 2.0 / ts**3
    s = expit(e)
    s1 = s * expit(-e)
    ds_dt = s1 * de
    d2s_dt2 = s1 * (1.0 - 2.0 * s) * de * de + s1 * d2e
    psi = radial_cutoff(radius, inner, outer)
    # dt/dr = -1/width
    dpsi = np.where(inside, -ds_dt / width, 0.0)
    d2psi = np.where(inside, d2s_dt2 / width**2, 0.0)
    return psi, dpsi, d2psi


@dataclass(frozen=True, eq=False)
class ClosedFormConductivity:
    """Isotropic conductivity ``gamma = sqrt_expr**2`` known in closed form."""

    name: str
    sqrt_expr: sp.Expr
    params: Mapping[str, float] = field(default_factory=dict)
    collar: Tuple[float, float] = (COLLAR_INNER, COLLAR_OUTER)

    @classmethod
    def from_gamma(cls, name: str, gamma_expr: sp.Expr, **params: float) -> "ClosedFormConductivity":
        """Build from ``gamma`` itself; ``sqrt`` is simplified symbolically."""

        return cls(name=name, sqrt_expr=sp.simplify(sp.sqrt(gamma_expr)), params=dict(params))

    @property
    def label(self) -> str:
        if not self.params:
            return self.name
        inner = ",".join(f"{key}={value:g}" for key, value in sorted(self.params.items()))
        return f"{self.name}({inner})"

    def scaled(self, factor: float) -> "ClosedFormConductivity":
        """``factor * gamma``; the Liouville potential is unchanged."""

        if factor <= 0.0:
            raise ParameterError(f"a conductivity can only be scaled by a positive factor, got {factor}")
        scale = factor * float(self.params.get("scale", 1.0))
        return replace(self, sqrt_expr=sp.sqrt(sp.Float(factor)) * self.sqrt_expr, params={**self.params, "scale": scale})

    @cached_property
    def gamma_expr(self) -> sp.Expr:
        return sp.expand(self.sqrt_expr**2)

    @cached_property
    def laplacian_expr(self) -> sp.Expr:
        return sp.simplify(sp.diff(self.sqrt_expr, X, 2) + sp.diff(self.sqrt_expr, Y, 2))

    @cached_property
    def potential_expr(self) -> sp.Expr:
        """Symbolic Liouville potential ``lap(sqrt(gamma)) / sqrt(gamma)``."""

        return sp.simplify(self.laplacian_expr / self.sqrt_expr)

    @cached_property
    def _compiled(self) -> Dict[str, _Compiled]:
        sqrt_expr = self.sqrt_expr
        return {
            "sqrt": _compile(sqrt_expr),
            "dx": _compile(sp.diff(sqrt_expr, X)),
            "dy": _compile(sp.diff(sqrt_expr, Y)),
            "lap": _compile(self.laplacian_expr),
            "gamma": _compile(self.gamma_expr),
        }

    def sqrt_gamma(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        values = self._compiled["sqrt"](points[:, 0], points[:, 1])
        if not np.all(np.isfinite(values)) or values.min(initial=1.0) <= 0.0:
            raise DomainError(f"conductivity {self.label} is not strictly positive on the requested points")
        return values

    def gamma(self, points: np.ndarray) -> np.ndarray:
        return self.sqrt_gamma(points) ** 2

    def potential(self, points: np.ndarray) -> np.ndarray:
        """Unblended potential, valid on the closed disk."""

        points = np.atleast_2d(points)
        sqrt_values = self.sqrt_gamma(points)
        return self._compiled["lap"](points[:, 0], points[:, 1]) / sqrt_values

    def blended_sqrt_gamma(self, points: np.ndarray) -> np.ndarray:
        """``1 + psi(r) (sqrt(gamma) - 1)``: equal to sqrt(gamma) on the disk and to 1 past the collar."""

        points = np.atleast_2d(points)
        psi = radial_cutoff(np.linalg.norm(points, axis=1), *self.collar)
        raw = self._compiled["sqrt"](points[:, 0], points[:, 1])
        values = 1.0 + psi * np.where(psi > 0.0, raw - 1.0, 0.0)
        if values.min(initial=1.0) <= 0.0:
            raise DomainError(f"blended conductivity {self.label} loses positivity in the collar")
        return values

    def blended_potential(self, points: np.ndarray) -> np.ndarray:
        """Potential of the blended conductivity; compactly supported in ``|x| <= collar[1]``."""

        points = np.atleast_2d(points)
        x, y = points[:, 0], points[:, 1]
        radius = np.hypot(x, y)
        psi, dpsi, d2psi = _cutoff_derivatives(radius, *self.collar)
        active = psi > 0.0
        compiled = self._compiled
        sigma = np.where(active, compiled["sqrt"](x, y), 1.0)
        sigma_x = np.where(active, compiled["dx"](x, y), 0.0)
        sigma_y = np.where(active, compiled["dy"](x, y), 0.0)
        sigma_lap = np.where(active, compiled["lap"](x, y), 0.0)
        safe_r = np.where(radius > 0.0, radius, 1.0)
        # radial psi: grad = psi' x / r, lap = psi'' + psi' / r
        grad_dot = dpsi * (x * sigma_x + y * sigma_y) / safe_r
        lap_psi = d2psi + dpsi / safe_r
        numerator = lap_psi * (sigma - 1.0) + 2.0 * grad_dot + psi * sigma_lap
        blended = 1.0 + psi * (sigma - 1.0)
        if blended.min(initial=1.0) <= 0.0:
            raise DomainError(f"blended conductivity {self.label} loses positivity in the collar")
        return np.where(active, numerator / blended, 0.0)

    def potential_sup(self, resolution: int = 101) -> float:
        """Sup of ``|q|`` over a sample of the closed disk."""

        axis = np.linspace(-1.0, 1.0, resolution)
        xx, yy = np.meshgrid(axis, axis)
        points = np.column_stack((xx.ravel(), yy.ravel()))
        points = points[np.linalg.norm(points, axis=1) <= 1.0]
        return float(np.abs(self.potential(points)).max())

    def k_min(self) -> float:
        """Default large-|k| threshold ``8 (1 + sup |q|)``."""

        return K_MIN_FACTOR * (1.0 + self.potential_sup())

    def scalar_field(self, mesh: Mesh, *, role: FieldRole = FieldRole.CONDUCTIVITY) -> ScalarField:
        return ScalarField.from_function(mesh, self.gamma, role=role, label=self.label, closed_form=self)

    def tensor_field(self, mesh: Mesh, *, role: FieldRole = FieldRole.CONDUCTIVITY) -> TensorField:
        return TensorField.isotropic(self.scalar_field(mesh, role=role), role=role, label=self.label)


def constant_family() -> ClosedFormConductivity:
    return ClosedFormConductivity(name="constant", sqrt_expr=sp.Integer(1))


def exponential_family(alpha: float = 1.0) -> ClosedFormConductivity:
    """``gamma = exp(alpha x)``, potential ``alpha**2 / 4``."""

    return ClosedFormConductivity(
        name="exponential",
        sqrt_expr=sp.exp(sp.Float(alpha) * X / 2),
        params={"alpha": float(alpha)},
    )


def quadratic_family(beta_x: float = 0.5, beta_y: float = 0.5) -> ClosedFormConductivity:
    """``sqrt(gamma) = 1 + beta_x x**2 + beta_y y**2``."""

    if beta_x < 0.0 or beta_y < 0.0:
        raise ParameterError("quadratic family needs non-negative coefficients")
    return ClosedFormConductivity(
        name="quadratic",
        sqrt_expr=1 + sp.Float(beta_x) * X**2 + sp.Float(beta_y) * Y**2,
        params={"beta_x": float(beta_x), "beta_y": float(beta_y)},
    )


def gaussian_family(
    amplitude: float = 0.1, center_x: float = 0.0, center_y: float = 0.0, width: float = 0.4
) -> ClosedFormConductivity:
    """``sqrt(gamma) = 1 + amplitude * exp(-|x - c|**2 / width**2)``."""

    if width <= 0.0 or amplitude <= -1.0:
        raise ParameterError("gaussian family needs width > 0 and amplitude > -1")
    distance2 = (X - sp.Float(center_x)) ** 2 + (Y - sp.Float(center_y)) ** 2
    return ClosedFormConductivity(
        name="gaussian",
        sqrt_expr=1 + sp.Float(amplitude) * sp.exp(-distance2 / sp.Float(width) ** 2),
        params={"amplitude": float(amplitude), "center_x": float(center_x), "center_y": float(center_y), "width": float(width)},
    )


CATALOG: Dict[str, Callable[..., ClosedFormConductivity]] = {
    "constant": constant_family,
    "exponential": exponential_family,
    "quadratic": quadratic_family,
    "gaussian": gaussian_family,
}


def build_conductivity(name: str, **params: float) -> ClosedFormConductivity:
    """Look up a catalog family by name and instantiate it."""

    try:
        factory = CATALOG[name]
    except KeyError as exc:
        raise ParameterError(f"unknown conductivity family '{name}'; known: {', '.join(sorted(CATALOG))}") from exc
    try:
        family = factory(**params)
    except TypeError as exc:
        raise ParameterError(f"bad parameters for family '{name}': {exc}") from exc
    logger.debug("Catalog conductivity %s, q = %s", family.label, family.potential_expr)
    return family


__all__ = [
    "X",
    "Y",
    "COLLAR_INNER",
    "COLLAR_OUTER",
    "ClosedFormConductivity",
    "constant_family",
    "exponential_family",
    "quadratic_family",
    "gaussian_family",
    "CATALOG",
    "build_conductivity",
]
