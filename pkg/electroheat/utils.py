"""Utility helpers for electroheat."""

from __future__ import annotations

import hashlib
import logging
import os
from typing import Sequence

import numpy as np

LOG_ENV_VAR = "ELECTROHEAT_LOG"
LOG_FORMAT = "[%(levelname)s] %(name)s: %(message)s"


def get_logger(name: str) -> logging.Logger:
    """Return a module logger honouring the ``ELECTROHEAT_LOG`` level."""

    logger = logging.getLogger(name)
    level_name = os.getenv(LOG_ENV_VAR, "INFO").upper()
    level = getattr(logging, level_name, logging.INFO)
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(handler)
        logger.propagate = False
    logger.setLevel(level)
    return logger


def bump_profile(s: np.ndarray) -> np.ndarray:
    """Smooth bump ``exp(1 - 1/(1 - s^2))`` for ``|s| < 1`` and zero elsewhere."""

    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1.0
    safe = np.where(inside, 1.0 - s * s, 1.0)
    return np.where(inside, np.exp(1.0 - 1.0 / safe), 0.0)


def bump_profile_derivative(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1.0
    safe = np.where(inside, 1.0 - s * s, 1.0)
    return np.where(inside, bump_profile(s) * (-2.0 * s / (safe * safe)), 0.0)


def smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity step rising from 0 at ``t <= 0`` to 1 at ``t >= 1``."""

    t = np.asarray(t, dtype=float)
    left = _transition_kernel(t)
    right = _transition_kernel(1.0 - t)
    return left / (left + right)


def _transition_kernel(t: np.ndarray) -> np.ndarray:
    positive = t > 0.0
    safe = np.where(positive, t, 1.0)
    return np.where(positive, np.exp(-1.0 / safe), 0.0)


def radial_cutoff(radius: np.ndarray, inner: float, outer: float) -> np.ndarray:
    """Equal to 1 for ``radius <= inner``, 0 for ``radius >= outer``, smooth between."""

    return smooth_step((outer - np.asarray(radius, dtype=float)) / (outer - inner))


def trapezoid_weights(times: np.ndarray) -> np.ndarray:
    """Quadrature weights of the composite trapezoid rule on a 1D grid."""

    times = np.asarray(times, dtype=float)
    weights = np.zeros_like(times)
    if times.size < 2:
        return weights
    steps = np.diff(times)
    weights[:-1] += 0.5 * steps
    weights[1:] += 0.5 * steps
    return weights


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""

    x_arr = np.abs(np.asarray(x, dtype=float))
    y_arr = np.abs(np.asarray(y, dtype=float))
    if x_arr.size < 2:
        raise ValueError("slope fit needs at least two samples")
    tiny = np.finfo(float).tiny
    slope, _ = np.polyfit(np.log(x_arr), np.log(np.maximum(y_arr, tiny)), 1)
    return float(slope)


def fingerprint(*arrays: np.ndarray) -> str:
    """Stable content hash of one or more arrays, used as a cache key."""

    digest = hashlib.sha1()
    for array in arrays:
        contiguous = np.ascontiguousarray(array)
        digest.update(str(contiguous.shape).encode())
        digest.update(contiguous.tobytes())
    return digest.hexdigest()


__all__ = [
    "LOG_ENV_VAR",
    "get_logger",
    "bump_profile",
    "bump_profile_derivative",
    "smooth_step",
    "radial_cutoff",
    "trapezoid_weights",
    "loglog_slope",
    "fingerprint",
]
