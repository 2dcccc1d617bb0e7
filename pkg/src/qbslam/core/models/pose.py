"""Planar pose and odometry value types."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


def wrap_angle(angle: float) -> float:
    """Wrap an angle to (−π, π]; angles already in range come back unchanged."""
    if -math.pi < angle <= math.pi:
        return angle
    wrapped = math.pi - (math.pi - angle) % math.tau
    # float modulo can land exactly on tau for inputs a hair above pi
    if wrapped <= -math.pi:
        wrapped += math.tau
    return wrapped


def wrap_angles(angles: np.ndarray) -> np.ndarray:
    """Vectorised :func:`wrap_angle`."""
    angles = np.asarray(angles, dtype=np.float64)
    wrapped = np.pi - np.mod(np.pi - angles, 2.0 * np.pi)
    wrapped = np.where(wrapped <= -np.pi, wrapped + 2.0 * np.pi, wrapped)
    return np.where((angles > -np.pi) & (angles <= np.pi), angles, wrapped)


class Pose(NamedTuple):
    """Planar pose: position in meters, heading in radians wrapped to (−π, π]."""

    x: float
    y: float
    theta: float

    def compose(self, delta: Pose) -> Pose:
        """Apply a body-frame displacement ``delta`` to this pose."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        return Pose(
            self.x + delta.x * c - delta.y * s,
            self.y + delta.x * s + delta.y * c,
            wrap_angle(self.theta + delta.theta),
        )

    def between(self, other: Pose) -> Pose:
        """Return ``other`` expressed in this pose's frame (so ``self.compose(result) == other``)."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        dx, dy = other.x - self.x, other.y - self.y
        return Pose(c * dx + s * dy, -s * dx + c * dy, wrap_angle(other.theta - self.theta))

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in self)


ORIGIN = Pose(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class OdometrySample:
    """Body-frame displacement measured since the previous sample."""

    timestamp: float
    dx: float
    dy: float
    dtheta: float

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.timestamp, self.dx, self.dy, self.dtheta)):
            raise ValueError(f'Odometry sample at t={self.timestamp} has non-finite fields')

    @property
    def delta(self) -> Pose:
        return Pose(self.dx, self.dy, self.dtheta)
