"""
Localisation and mapping mean absolute errors.

Both metrics use per-axis L1 deviations (|Δx| + |Δy|), not Euclidean distances.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

import numpy as np

from qbslam.exceptions.evaluation import EmptyTrajectoryError, EvaluationError, MismatchedTrajectoryError
from qbslam.utils.logging import get_configured_logger

if TYPE_CHECKING:
    from qbslam.core.evaluation.alignment import AlignmentTransform

logger = get_configured_logger('Metrics')

_CHUNK = 1024


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Planar positions with timestamps: rows ``(timestamp, x, y)``."""

    points: np.ndarray

    def __post_init__(self) -> None:
        points = np.array(self.points, dtype=np.float64).reshape(-1, 3)
        if not np.all(np.isfinite(points)):
            raise EvaluationError('Trajectory contains non-finite values')
        if np.any(np.diff(points[:, 0]) < 0):
            raise EvaluationError('Trajectory timestamps must be nondecreasing')
        points.setflags(write=False)
        object.__setattr__(self, 'points', points)

    @classmethod
    def from_xy(cls, timestamps: np.ndarray, xy: np.ndarray) -> Trajectory:
        return cls(np.column_stack((np.asarray(timestamps, dtype=np.float64), np.asarray(xy, dtype=np.float64))))

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def timestamps(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def xy(self) -> np.ndarray:
        return self.points[:, 1:]


def _require_points(name: str, count: int) -> None:
    if count == 0:
        raise EmptyTrajectoryError(f'{name} has no points')


def associate(traj: Trajectory, gt: Trajectory) -> Trajectory:
    """
    Resample ``gt`` onto the timestamps of ``traj`` by nearest timestamp.

    The earlier ground-truth sample wins when two are equally close. Rows of the result
    keep the chosen ground-truth timestamps.
    """
    _require_points('Trajectory', len(traj))
    _require_points('Ground truth', len(gt))
    stamps = gt.timestamps
    right = np.clip(np.searchsorted(stamps, traj.timestamps, side='left'), 0, len(gt) - 1)
    left = np.clip(right - 1, 0, len(gt) - 1)
    use_left = np.abs(traj.timestamps - stamps[left]) <= np.abs(stamps[right] - traj.timestamps)
    return Trajectory(gt.points[np.where(use_left, left, right)])


def mae_localisation(traj: Trajectory, gt: Trajectory) -> float:
    """
    Mean over k of |x_k − x_k^gt| + |y_k − y_k^gt| for index-aligned trajectories.

    Raises:
        EmptyTrajectoryError: If either trajectory is empty
        MismatchedTrajectoryError: If lengths differ
    """
    _require_points('Trajectory', len(traj))
    _require_points('Ground truth', len(gt))
    if len(traj) != len(gt):
        raise MismatchedTrajectoryError(
            f'Trajectory has {len(traj)} points, ground truth {len(gt)}', lengths=(len(traj), len(gt))
        )
    return float(np.mean(np.abs(traj.xy - gt.xy).sum(axis=1)))


def mae_mapping(map_points: np.ndarray, gt: Trajectory, normalize_by: int | None = None) -> float:
    """
    Sum over map points of the L1 distance to the nearest ground-truth point, divided by
    the number of map points (or by ``normalize_by`` when given, e.g. the frame count).

    Raises:
        EmptyTrajectoryError: If there are no map points or no ground truth
    """
    points = np.asarray(map_points, dtype=np.float64).reshape(-1, 2)
    _require_points('Map', points.shape[0])
    _require_points('Ground truth', len(gt))
    if normalize_by is not None and normalize_by <= 0:
        raise EvaluationError(f'normalize_by must be positive, got {normalize_by}')

    reference = gt.xy
    total = 0.0
    for start in range(0, points.shape[0], _CHUNK):
        chunk = points[start : start + _CHUNK]
        distances = np.abs(chunk[:, None, :] - reference[None, :, :]).sum(axis=2)
        total += float(distances.min(axis=1).sum())
    return total / (normalize_by if normalize_by is not None else points.shape[0])


@dataclass(frozen=True)
class MetricsReport:
    """Evaluation summary written as ``metrics.json``."""

    scenario: str
    mae_l: float
    mae_m: float
    transform: AlignmentTransform
    mu: float
    params_hash: str

    def to_dict(self) -> dict[str, Any]:
        return {
            'scenario': self.scenario,
            'mae_l': self.mae_l,
            'mae_m': self.mae_m,
            'transform': {'tx': self.transform.tx, 'ty': self.transform.ty, 'phi': self.transform.phi},
            'mu': self.mu,
            'params_hash': self.params_hash,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + '\n'
