"""Periodic spectral grid on a square box and Cauchy transforms.

Complex notation: ``z = x + i y``, ``d = (dx - i dy) / 2``, ``dbar = (dx + i dy) / 2``.
With the transform ``f^(xi) = int f(x) exp(-i x.xi) dx`` the symbols are
``2 dbar <-> i (xi1 + i xi2)`` and ``2 d <-> i (xi1 - i xi2)``.

``P g = (1/2pi) int g(w) / (z - w) dw`` inverts ``2 dbar`` and ``Pbar`` (kernel
``1/(2pi conj z)``) inverts ``2 d``. Both are evaluated on a grid of twice the size,
with the input zero-padded and the kernel truncated to a disk of radius
``KERNEL_RADIUS_FACTOR * L``. Inputs must vanish outside ``|x| <= SUPPORT_FACTOR * L``;
then no periodic image of the truncated kernel reaches an evaluation point and
no truncation edge is seen.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, Iterable

import numpy as np
import scipy.fft
from scipy.special import j0

from .errors import ParameterError
from .utils import get_logger, radial_cutoff

logger = get_logger(__name__)

MIN_HALF_WIDTH = 2.0
MIN_RESOLUTION = 128
SUPPORT_FACTOR = 0.75
KERNEL_RADIUS_FACTOR = 2.2
SUPPORT_TOL = 1e-10
CHI_INNER = 1.05
CHI_OUTER = 1.45
DISK_SUBSAMPLES = 16
DERIVATIVES = ("d", "dbar", "lap")
METHODS = ("fourier", "sampled")


def _derivative_symbol(op: str, xi1: np.ndarray, xi2: np.ndarray) -> np.ndarray:
    if op == "d":
        return 0.5 * (1j * xi1 + xi2)
    if op == "dbar":
        return 0.5 * (1j * xi1 - xi2)
    if op == "lap":
        return -(xi1 * xi1 + xi2 * xi2).astype(complex)
    raise ParameterError(f"unknown derivative '{op}'; expected one of {DERIVATIVES}")


def _nyquist_mask(n: int) -> np.ndarray:
    """False on the row and column of the Nyquist frequency."""

    mask = np.ones((n, n), dtype=bool)
    mask[n // 2, :] = False
    mask[:, n // 2] = False
    return mask


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    """Uniform ``n x n`` periodic grid on ``[-L, L)^2``; arrays are indexed ``[y, x]``."""

    half_width: float = 2.0
    n: int = 512

    def __post_init__(self) -> None:
        if self.half_width < MIN_HALF_WIDTH:
            raise ParameterError(f"box half-width must be at least {MIN_HALF_WIDTH}, got {self.half_width}")
        if self.n < MIN_RESOLUTION or self.n & (self.n - 1):
            raise ParameterError(f"resolution must be a power of two >= {MIN_RESOLUTION}, got {self.n}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.n

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    @cached_property
    def axis(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(self.n)

    @cached_property
    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.axis, self.axis)

    @property
    def x(self) -> np.ndarray:
        return self.coordinates[0]

    @property
    def y(self) -> np.ndarray:
        return self.coordinates[1]

    @cached_property
    def z(self) -> np.ndarray:
        return self.x + 1j * self.y

    @cached_property
    def radius(self) -> np.ndarray:
        return np.hypot(self.x, self.y)

    @cached_property
    def points(self) -> np.ndarray:
        return np.column_stack((self.x.ravel(), self.y.ravel()))

    @cached_property
    def frequencies(self) -> tuple[np.ndarray, np.ndarray]:
        freq = 2.0 * np.pi * scipy.fft.fftfreq(self.n, d=self.spacing)
        return np.meshgrid(freq, freq)

    @cached_property
    def disk_mask(self) -> np.ndarray:
        return self.radius <= 1.0

    @cached_property
    def disk_weights(self) -> np.ndarray:
        """Area of each grid cell inside the unit disk; cut cells are subsampled."""

        h = self.spacing
        fraction = np.where(self.radius <= 1.0 - h, 1.0, 0.0)
        cut = np.abs(self.radius - 1.0) < h
        offsets = (np.arange(DISK_SUBSAMPLES) + 0.5) / DISK_SUBSAMPLES - 0.5
        sub_x, sub_y = np.meshgrid(offsets * h, offsets * h)
        xs = self.x[cut][:, None] + sub_x.ravel()[None, :]
        ys = self.y[cut][:, None] + sub_y.ravel()[None, :]
        fraction[cut] = np.mean(xs * xs + ys * ys <= 1.0, axis=1)
        return fraction * h * h

    def sample(self, func: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Evaluate ``func`` (points ``(m, 2)`` to values) on the grid."""

        return np.asarray(func(self.points)).reshape(self.shape)

    def cutoff(self, inner: float = CHI_INNER, outer: float = CHI_OUTER) -> np.ndarray:
        """Smooth radial cutoff equal to 1 for ``|x| <= inner`` and 0 beyond ``outer``."""

        if not (1.0 <= inner < outer <= SUPPORT_FACTOR * self.half_width):
            raise ParameterError(f"cutoff radii ({inner}, {outer}) must satisfy 1 <= inner < outer <= {SUPPORT_FACTOR * self.half_width}")
        return radial_cutoff(self.radius, inner, outer)

    def integrate_disk(self, field: np.ndarray) -> complex:
        return complex(np.sum(self.disk_weights * field))

    def l2_disk(self, field: np.ndarray) -> float:
        return float(np.sqrt(np.sum(self.disk_weights * np.abs(field) ** 2)))

    def sup_disk(self, field: np.ndarray) -> float:
        return float(np.abs(field[self.disk_mask]).max())

    def require_support(self, field: np.ndarray, name: str = "field") -> None:
        """Raise ParameterError unless ``field`` vanishes outside ``|x| <= 0.75 L``."""

        magnitude = np.abs(field)
        scale = float(magnitude.max(initial=0.0))
        if scale == 0.0:
            return
        outside = magnitude[self.radius > SUPPORT_FACTOR * self.half_width]
        leak = float(outside.max(initial=0.0))
        if leak > SUPPORT_TOL * scale:
            raise ParameterError(
                f"{name} is not supported in |x| <= {SUPPORT_FACTOR * self.half_width:g} (leak {leak:.2e} of {scale:.2e})"
            )

    def derivative(self, field: np.ndarray, op: str) -> np.ndarray:
        """Spectral ``d``, ``dbar`` or ``lap`` of a field that is smooth and periodic on the box."""

        xi1, xi2 = self.frequencies
        symbol = _derivative_symbol(op, xi1, xi2)
        if op != "lap":
            symbol = symbol * _nyquist_mask(self.n)
        return scipy.fft.ifft2(scipy.fft.fft2(field) * symbol)


class CauchyTransform:
    """``P`` and ``Pbar`` on a grid, with derivatives of the output.

    Args:
        grid: Host grid.
        method: ``"fourier"`` uses the exact transform of the truncated kernel,
            ``(1 - J0(|xi| D)) / (i xi)``; ``"sampled"`` samples ``1/(2 pi z)`` on the grid
            with the cell average (zero) at the origin, a lower-order cross-check.
    """

    def __init__(self, grid: SpectralGrid, method: str = "fourier") -> None:
        if method not in METHODS:
            raise ParameterError(f"method must be one of {METHODS}, got '{method}'")
        self.grid = grid
        self.method = method
        self.kernel_radius = KERNEL_RADIUS_FACTOR * grid.half_width
        self._pad = grid.n // 2

    @cached_property
    def _padded_frequencies(self) -> tuple[np.ndarray, np.ndarray]:
        size = 2 * self.grid.n
        freq = 2.0 * np.pi * scipy.fft.fftfreq(size, d=self.grid.spacing)
        return np.meshgrid(freq, freq)

    @cached_property
    def _nyquist(self) -> np.ndarray:
        return _nyquist_mask(2 * self.grid.n)

    def _kernel_symbol(self, conjugate: bool) -> np.ndarray:
        xi1, xi2 = self._padded_frequencies
        if self.method == "fourier":
            xi = xi1 + 1j * xi2
            if conjugate:
                xi = np.conj(xi)
            magnitude = np.hypot(xi1, xi2)
            safe = np.where(magnitude > 0.0, xi, 1.0)
            symbol = np.where(magnitude > 0.0, (1.0 - j0(magnitude * self.kernel_radius)) / (1j * safe), 0.0)
        else:
            size = 2 * self.grid.n
            h = self.grid.spacing
            offsets = h * scipy.fft.fftfreq(size, d=1.0 / size)
            kx, ky = np.meshgrid(offsets, offsets)
            w = kx - 1j * ky if conjugate else kx + 1j * ky
            inside = (np.abs(w) <= self.kernel_radius) & (np.abs(w) > 0.0)
            kernel = np.where(inside, 1.0 / (2.0 * np.pi * np.where(inside, w, 1.0)), 0.0)
            symbol = scipy.fft.fft2(kernel) * h * h
        return symbol * self._nyquist

    @cached_property
    def _symbols(self) -> Dict[bool, np.ndarray]:
        return {False: self._kernel_symbol(False), True: self._kernel_symbol(True)}

    def _padded(self, g: np.ndarray) -> np.ndarray:
        n, pad = self.grid.n, self._pad
        out = np.zeros((2 * n, 2 * n), dtype=complex)
        out[pad : pad + n, pad : pad + n] = g
        return out

    def _crop(self, padded: np.ndarray) -> np.ndarray:
        n, pad = self.grid.n, self._pad
        return padded[pad : pad + n, pad : pad + n]

    def apply(
        self, g: np.ndarray, *, conjugate: bool = False, derivatives: Iterable[str] = ()
    ) -> Dict[str, np.ndarray]:
        """``P g`` (or ``Pbar g``) under key ``"value"`` plus the requested derivatives of it.

        Raises:
            ParameterError: If ``g`` is not supported in ``|x| <= 0.75 L``.
        """

        g = np.asarray(g)
        if g.shape != self.grid.shape:
            raise ParameterError(f"field shape {g.shape} does not match grid {self.grid.shape}")
        self.grid.require_support(g, "Cauchy transform input")
        spectrum = scipy.fft.fft2(self._padded(g)) * self._symbols[conjugate]
        result = {"value": self._crop(scipy.fft.ifft2(spectrum))}
        xi1, xi2 = self._padded_frequencies
        for op in derivatives:
            symbol = _derivative_symbol(op, xi1, xi2)
            result[op] = self._crop(scipy.fft.ifft2(spectrum * symbol))
        return result

    def P(self, g: np.ndarray) -> np.ndarray:
        return self.apply(g)["value"]

    def Pbar(self, g: np.ndarray) -> np.ndarray:
        return self.apply(g, conjugate=True)["value"]


def cauchy_P(grid: SpectralGrid, g: np.ndarray, method: str = "fourier") -> np.ndarray:
    """Cauchy transform ``P``, the inverse of ``2 dbar`` on compactly supported fields."""

    return CauchyTransform(grid, method).P(g)


def cauchy_Pbar(grid: SpectralGrid, g: np.ndarray, method: str = "fourier") -> np.ndarray:
    """Conjugate transform ``Pbar``, the inverse of ``2 d``."""

    return CauchyTransform(grid, method).Pbar(g)


def inverse_property_error(transform: CauchyTransform, g: np.ndarray, *, conjugate: bool = False) -> float:
    """Sup over the disk of ``|2 dbar P g - g|`` (or ``|2 d Pbar g - g|``)."""

    op = "d" if conjugate else "dbar"
    applied = transform.apply(g, conjugate=conjugate, derivatives=(op,))
    return transform.grid.sup_disk(2.0 * applied[op] - g)


def disk_indicator(grid: SpectralGrid) -> np.ndarray:
    """Cell-averaged indicator of the unit disk."""

    return grid.disk_weights / grid.spacing**2


def disk_indicator_transform(z: np.ndarray) -> np.ndarray:
    """Closed form of ``P`` applied to the unit-disk indicator: ``conj(z)/2`` inside, ``1/(2z)`` outside."""

    inside = np.abs(z) <= 1.0
    safe = np.where(inside, 1.0, z)
    return np.where(inside, 0.5 * np.conj(z), 0.5 / safe)


__all__ = [
    "SpectralGrid",
    "CauchyTransform",
    "cauchy_P",
    "cauchy_Pbar",
    "inverse_property_error",
    "disk_indicator",
    "disk_indicator_transform",
    "DERIVATIVES",
]
