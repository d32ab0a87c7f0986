"""
Seeded point sampling in the domain ball.

Points are uniform in the ball of the problem's norm, drawn by rejection
from the bounding cube. The same seed always produces the same points.
"""

import numpy as np

from src.operators.linalg import NormChoice

DEFAULT_SEED = 0xC0FFEE
# keeps rounded sample points inside the closed ball
BALL_SHRINK = 1.0 - 1e-12


def unit_ball_points(dim: int, count: int, norm: NormChoice, rng: np.random.Generator) -> np.ndarray:
    """``count`` points uniform in the unit ball of ``norm``, shape (count, dim)."""
    accepted: list[np.ndarray] = []
    total = 0
    while total < count:
        batch = rng.uniform(-1.0, 1.0, size=(max(2 * (count - total), 16), dim))
        if norm is NormChoice.EUCLIDEAN:
            batch = batch[np.linalg.norm(batch, axis=1) <= 1.0]
        accepted.append(batch)
        total += batch.shape[0]
    return np.concatenate(accepted)[:count]


def sample_pairs(
    center: np.ndarray,
    radius: float,
    count: int,
    norm: NormChoice,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Independent pairs (x′, x″), both uniform in the ball B(center, radius).

    Returns:
        Two arrays of shape (count, dim)
    """
    center = np.atleast_1d(np.asarray(center, dtype=float))
    points = center + radius * BALL_SHRINK * unit_ball_points(center.size, 2 * count, norm, rng)
    return points[0::2], points[1::2]


def sample_nested_pairs(
    center: np.ndarray,
    radius: float,
    count: int,
    norm: NormChoice,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Radii t uniform in [0, radius] and pairs uniform in B(center, t).

    Returns:
        (t of shape (count,), x′, x″ of shape (count, dim))
    """
    center = np.atleast_1d(np.asarray(center, dtype=float))
    radii = rng.uniform(0.0, radius * BALL_SHRINK, size=count)
    unit = unit_ball_points(center.size, 2 * count, norm, rng)
    first = center + radii[:, None] * unit[0::2]
    second = center + radii[:, None] * unit[1::2]
    return radii, first, second
