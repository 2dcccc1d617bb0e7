"""
Rigid planar alignment of a SLAM trajectory to ground truth by exhaustive grid search.

For a fixed rotation the localisation MAE splits into an x term that depends only on
tx and a y term that depends only on ty, so each rotation costs two one-dimensional
scans instead of a full (tx, ty) sweep. The minimiser is the same grid point a
brute-force enumeration returns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from qbslam.core.evaluation.metrics import Trajectory, mae_localisation
from qbslam.core.models.pose import wrap_angle
from qbslam.exceptions.config import ConfigurationError
from qbslam.exceptions.evaluation import EmptyTrajectoryError, MismatchedTrajectoryError
from qbslam.utils.logging import get_configured_logger

logger = get_configured_logger('Alignment')

TIE_TOLERANCE = 1e-12
REFINE_FACTOR = 10


@dataclass(frozen=True)
class AlignmentTransform:
    """Rotation by ``phi`` about the origin followed by translation ``(tx, ty)``."""

    tx: float = 0.0
    ty: float = 0.0
    phi: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, 'phi', wrap_angle(float(self.phi)))

    def inverse(self) -> AlignmentTransform:
        c, s = math.cos(self.phi), math.sin(self.phi)
        return AlignmentTransform(-(c * self.tx + s * self.ty), -(-s * self.tx + c * self.ty), -self.phi)

    def apply_xy(self, xy: np.ndarray) -> np.ndarray:
        c, s = math.cos(self.phi), math.sin(self.phi)
        x, y = xy[:, 0], xy[:, 1]
        return np.column_stack((c * x - s * y + self.tx, s * x + c * y + self.ty))


IDENTITY = AlignmentTransform()


def apply_transform(t: AlignmentTransform, traj: Trajectory) -> Trajectory:
    """Rotate every point by ``t.phi`` about the origin, then translate by ``(t.tx, t.ty)``."""
    return Trajectory.from_xy(traj.timestamps, t.apply_xy(traj.xy))


@dataclass(frozen=True)
class GridSpec:
    """Inclusive ``(min, max, step)`` ranges: meters for translation, radians for rotation."""

    tx_range: tuple[float, float, float]
    ty_range: tuple[float, float, float]
    phi_range: tuple[float, float, float]

    def __post_init__(self) -> None:
        for key in ('tx_range', 'ty_range', 'phi_range'):
            lo, hi, step = (float(v) for v in getattr(self, key))
            if not step > 0 or hi < lo:
                raise ConfigurationError(f'{key} must satisfy min ≤ max and step > 0, got {(lo, hi, step)}', key)
            object.__setattr__(self, key, (lo, hi, step))
        lo, hi, _ = self.phi_range
        if lo <= -math.pi or hi > math.pi:
            raise ConfigurationError(f'phi_range must lie within (−π, π], got {self.phi_range}', 'phi_range')

    @classmethod
    def default(cls) -> GridSpec:
        """±10 m in 0.1 m steps; rotations from −179° to 180° in 1° steps."""
        return cls((-10.0, 10.0, 0.1), (-10.0, 10.0, 0.1), (math.radians(-179.0), math.pi, math.radians(1.0)))

    @staticmethod
    def _axis(lo: float, hi: float, step: float) -> np.ndarray:
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return np.linspace(lo, lo + (count - 1) * step, count)

    def values(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Grid axes ``(tx, ty, phi)``."""
        return self._axis(*self.tx_range), self._axis(*self.ty_range), self._axis(*self.phi_range)

    @property
    def size(self) -> int:
        tx, ty, phi = self.values()
        return tx.size * ty.size * phi.size


class AlignmentResult(NamedTuple):
    transform: AlignmentTransform
    mae: float


def _preference(values: np.ndarray) -> np.ndarray:
    """Indices ordered by |v|, the negative value first when magnitudes tie."""
    return np.lexsort((values, np.abs(values)))


def _axis_costs(candidates: np.ndarray, residual: np.ndarray) -> np.ndarray:
    """Mean |c − r| over residuals for each candidate offset c."""
    return np.abs(candidates[:, None] - residual[None, :]).mean(axis=1)


def _search(traj: Trajectory, gt: Trajectory, tx: np.ndarray, ty: np.ndarray, phi: np.ndarray) -> AlignmentTransform:
    x, y = traj.xy[:, 0], traj.xy[:, 1]
    gx, gy = gt.xy[:, 0], gt.xy[:, 1]

    costs_x = np.empty((phi.size, tx.size))
    costs_y = np.empty((phi.size, ty.size))
    for i, angle in enumerate(phi):
        c, s = math.cos(angle), math.sin(angle)
        costs_x[i] = _axis_costs(tx, gx - (c * x - s * y))
        costs_y[i] = _axis_costs(ty, gy - (s * x + c * y))

    best_per_phi = costs_x.min(axis=1) + costs_y.min(axis=1)
    limit = float(best_per_phi.min()) + TIE_TOLERANCE

    tx_order, ty_order = _preference(tx), _preference(ty)
    for i in _preference(phi):
        if best_per_phi[i] > limit:
            continue
        floor_y = costs_y[i].min()
        for j in tx_order:
            if costs_x[i, j] + floor_y > limit:
                continue
            for k in ty_order:
                if costs_x[i, j] + costs_y[i, k] <= limit:
                    return AlignmentTransform(float(tx[j]), float(ty[k]), float(phi[i]))
    # unreachable: the global minimum itself satisfies the limit
    raise AssertionError('grid search found no minimiser')


def align_by_grid_search(
    traj: Trajectory,
    gt: Trajectory,
    grid: GridSpec | None = None,
    refine: int = 0,
) -> AlignmentResult:
    """
    Grid point minimising the localisation MAE of the transformed trajectory.

    Ties (within 1e-12 of the minimum) go to the smallest (|phi|, |tx|, |ty|).

    Args:
        traj: SLAM trajectory, index-aligned with ``gt``
        gt: Ground truth
        grid: Search grid, :meth:`GridSpec.default` when omitted
        refine: Number of extra passes on a 10× finer grid around the current best

    Raises:
        EmptyTrajectoryError: If either trajectory is empty
        MismatchedTrajectoryError: If lengths differ
    """
    if len(traj) == 0 or len(gt) == 0:
        raise EmptyTrajectoryError('Cannot align an empty trajectory')
    if len(traj) != len(gt):
        raise MismatchedTrajectoryError(
            f'Trajectory has {len(traj)} points, ground truth {len(gt)}', lengths=(len(traj), len(gt))
        )

    grid = grid or GridSpec.default()
    best = _search(traj, gt, *grid.values())
    best_mae = mae_localisation(apply_transform(best, traj), gt)

    steps = (grid.tx_range[2], grid.ty_range[2], grid.phi_range[2])
    for _ in range(refine):
        steps = tuple(s / REFINE_FACTOR for s in steps)
        span = REFINE_FACTOR // 2
        tx = best.tx + steps[0] * np.arange(-span * 2, span * 2 + 1)
        ty = best.ty + steps[1] * np.arange(-span * 2, span * 2 + 1)
        phi = best.phi + steps[2] * np.arange(-span * 2, span * 2 + 1)
        phi = phi[(phi > -math.pi) & (phi <= math.pi)]
        candidate = _search(traj, gt, tx, ty, phi)
        candidate_mae = mae_localisation(apply_transform(candidate, traj), gt)
        if candidate_mae < best_mae:
            best, best_mae = candidate, candidate_mae

    logger.info(f'Aligned {len(traj)} points: tx={best.tx:.3f} ty={best.ty:.3f} phi={best.phi:.4f} mae={best_mae:.4f}')
    return AlignmentResult(best, best_mae)
