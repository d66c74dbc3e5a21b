"""Expansion of a single outlier into a synthetic outlier class."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import distances_to
from .exceptions import NotIsolatedError

# keeps rounding in the radius scaling from pushing a sample past the ball surface
_SHRINK = 1.0 - 1e-12


@dataclass(frozen=True)
class SyntheticOutlierClass:
    points: np.ndarray
    center: np.ndarray
    radius: float
    seed: object = None

    def __len__(self):
        return self.points.shape[0]


def uniform_ball(center, radius: float, count: int, rng) -> np.ndarray:
    center = np.asarray(center, dtype=float)
    m = center.size
    direction = rng.standard_normal((count, m))
    norms = np.linalg.norm(direction, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    scale = radius * _SHRINK * rng.random((count, 1)) ** (1.0 / m)
    return center + direction / norms * scale


def expand_outlier(outlier, context_points, count: int | None = None, radius_factor: float = 0.5,
                   seed=0) -> SyntheticOutlierClass:
    """Sample ``count`` points uniformly from the ball of radius
    ``radius_factor * (distance to the nearest context point)`` around the outlier.

    The first point is the outlier itself. ``count`` defaults to the context size.
    """
    outlier = np.asarray(outlier, dtype=float)
    context_points = np.atleast_2d(np.asarray(context_points, dtype=float))
    if context_points.shape[0] == 0:
        raise ValueError("context is empty")
    if not 0 < radius_factor < 1:
        raise ValueError(f"radius_factor must lie in (0, 1), got {radius_factor}")
    if count is None:
        count = context_points.shape[0]
    if count < 1:
        raise ValueError("count must be at least 1")
    d_min = float(distances_to(context_points, outlier).min())
    if d_min == 0.0:
        raise NotIsolatedError("query coincides with a context member")
    radius = radius_factor * d_min
    rng = np.random.default_rng(seed)
    points = np.vstack([outlier[None, :], uniform_ball(outlier, radius, count - 1, rng)])
    return SyntheticOutlierClass(points, outlier, radius, seed)
