"""Dead-reckoning integration of body-frame odometry."""

from __future__ import annotations

from collections.abc import Iterable

from qbslam.core.models.pose import ORIGIN, OdometrySample, Pose


def integrate_odometry(pose: Pose, odo: OdometrySample) -> Pose:
    """Apply one body-frame odometry sample to ``pose``."""
    return pose.compose(odo.delta)


def dead_reckoning(samples: Iterable[OdometrySample], start: Pose = ORIGIN) -> list[Pose]:
    """Cumulative poses after each sample, starting from ``start``."""
    poses = []
    pose = start
    for sample in samples:
        pose = integrate_odometry(pose, sample)
        poses.append(pose)
    return poses
