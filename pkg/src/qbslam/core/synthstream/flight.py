"""
Flight simulation through a generated warehouse.

The vehicle flies a waypoint list: at each waypoint it turns in place toward the next
one at ``turn_rate``, then translates at ``speed``. One frame, one odometry sample and
one ground-truth position are emitted per tick. Noise enters the odometry only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from qbslam.core.models.frame import Frame
from qbslam.core.models.pose import OdometrySample, Pose, wrap_angle
from qbslam.core.synthstream.world import World, render
from qbslam.exceptions.config import ConfigurationError
from qbslam.exceptions.datasets import FlightPlanError, WaypointOutOfBoundsError
from qbslam.utils.logging import get_configured_logger, trackerator

logger = get_configured_logger('Flight')

DEFAULT_TURN_RATE = math.pi / 6
DEFAULT_REDUNDANCY_BOUND = 0.15


@dataclass(frozen=True)
class FlightPlan:
    """
    Commanded path and sensor settings.

    ``odom_noise`` is ``(σ_xy, σ_θ)`` per odometry step. ``start_heading`` defaults to
    the bearing of the first leg.
    """

    waypoints: tuple[tuple[float, float], ...]
    speed: float = 1.0
    frame_rate: float = 10.0
    odom_noise: tuple[float, float] = (0.0, 0.0)
    turn_rate: float = DEFAULT_TURN_RATE
    seed: int = 0
    redundancy_bound: float = DEFAULT_REDUNDANCY_BOUND
    strict: bool = False
    start_heading: float | None = None

    def __post_init__(self) -> None:
        waypoints = tuple((float(x), float(y)) for x, y in self.waypoints)
        object.__setattr__(self, 'waypoints', waypoints)
        object.__setattr__(self, 'odom_noise', (float(self.odom_noise[0]), float(self.odom_noise[1])))
        if not waypoints:
            raise FlightPlanError('A flight plan needs at least one waypoint')
        for key in ('speed', 'frame_rate', 'turn_rate', 'redundancy_bound'):
            if not getattr(self, key) > 0:
                raise ConfigurationError(f'{key} must be positive, got {getattr(self, key)}', config_key=key)
        if min(self.odom_noise) < 0:
            raise ConfigurationError(f'odom_noise must be ≥ 0, got {self.odom_noise}', config_key='odom_noise')

    @property
    def period(self) -> float:
        return 1.0 / self.frame_rate

    def to_dict(self) -> dict[str, object]:
        return {
            'waypoints': [list(w) for w in self.waypoints],
            'speed': self.speed,
            'frame_rate': self.frame_rate,
            'odom_noise': list(self.odom_noise),
            'turn_rate': self.turn_rate,
            'seed': self.seed,
            'redundancy_bound': self.redundancy_bound,
            'strict': self.strict,
            'start_heading': self.start_heading,
        }


@dataclass(eq=False)
class FlightRecord:
    """
    Time-aligned frames, odometry and ground truth of one flight.

    ``ground_truth`` rows are ``(timestamp, x, y)``; ``headings`` holds the true yaw per
    tick. ``seams`` lists the indices where concatenated flights join.
    """

    frames: list[Frame]
    odometry: list[OdometrySample]
    ground_truth: np.ndarray
    headings: np.ndarray
    frame_rate: float
    seams: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        lengths = {len(self.frames), len(self.odometry), len(self.ground_truth), len(self.headings)}
        if len(lengths) != 1:
            raise FlightPlanError(
                f'Streams are not aligned: {len(self.frames)} frames, {len(self.odometry)} odometry, '
                f'{len(self.ground_truth)} ground truth, {len(self.headings)} headings'
            )

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def timestamps(self) -> np.ndarray:
        return self.ground_truth[:, 0].copy()

    def true_pose(self, k: int) -> Pose:
        return Pose(float(self.ground_truth[k, 1]), float(self.ground_truth[k, 2]), float(self.headings[k]))

    def frame_deltas(self) -> np.ndarray:
        """Mean per-pixel |s̄_{k+1} − s̄_k| for every consecutive pair that is not a seam."""
        deltas = [
            float(np.mean(np.abs(self.frames[k + 1].pixels - self.frames[k].pixels)))
            for k in range(len(self.frames) - 1)
            if k + 1 not in self.seams
        ]
        return np.asarray(deltas, dtype=np.float64)

    def concatenate(self, other: FlightRecord, odom_noise: tuple[float, float] = (0.0, 0.0), seed: int = 0) -> FlightRecord:
        """
        Append ``other`` after this record.

        Timestamps and frame indices continue. The odometry sample at the seam is the
        true relative pose between the two flights plus noise drawn from ``seed``.
        """
        if not self.frames:
            return other
        if not other.frames:
            return self
        period = 1.0 / self.frame_rate
        seam = len(self)
        shift = float(self.ground_truth[-1, 0]) + period - float(other.ground_truth[0, 0])

        frames = list(self.frames)
        for frame in other.frames:
            frames.append(
                Frame(
                    index=seam + frame.index - other.frames[0].index,
                    timestamp=frame.timestamp + shift,
                    pixels=frame.pixels,
                    width=frame.width,
                    height=frame.height,
                    channels=frame.channels,
                )
            )

        rng = np.random.default_rng(seed)
        jump = self.true_pose(seam - 1).between(other.true_pose(0))
        sigma_xy, sigma_theta = odom_noise
        odometry = list(self.odometry)
        odometry.append(
            OdometrySample(
                timestamp=other.odometry[0].timestamp + shift,
                dx=jump.x + rng.normal(0.0, sigma_xy) if sigma_xy else jump.x,
                dy=jump.y + rng.normal(0.0, sigma_xy) if sigma_xy else jump.y,
                dtheta=jump.theta + rng.normal(0.0, sigma_theta) if sigma_theta else jump.theta,
            )
        )
        odometry.extend(
            OdometrySample(o.timestamp + shift, o.dx, o.dy, o.dtheta) for o in other.odometry[1:]
        )

        other_gt = other.ground_truth.copy()
        other_gt[:, 0] += shift
        return FlightRecord(
            frames=frames,
            odometry=odometry,
            ground_truth=np.vstack((self.ground_truth, other_gt)),
            headings=np.concatenate((self.headings, other.headings)),
            frame_rate=self.frame_rate,
            seams=(*self.seams, seam, *(seam + s for s in other.seams)),
        )


# ── Path sampling ────────────────────────────────────────────────────────────


def _check_waypoints(world: World, plan: FlightPlan) -> None:
    for x, y in plan.waypoints:
        if not (0.0 < x < world.width and 0.0 < y < world.height):
            raise WaypointOutOfBoundsError(
                f'Waypoint ({x}, {y}) lies outside the {world.width:g}x{world.height:g} m world', waypoint=(x, y)
            )
        if not world.contains(x, y):
            raise FlightPlanError(f'Waypoint ({x}, {y}) lies inside a shelf')


def _phases(plan: FlightPlan) -> list[tuple[Pose, float, float, float]]:
    """``(start pose, rotation, distance, duration)`` per phase: turns and straight legs alternate."""
    waypoints = plan.waypoints
    if len(waypoints) > 1:
        first_bearing = math.atan2(waypoints[1][1] - waypoints[0][1], waypoints[1][0] - waypoints[0][0])
    else:
        first_bearing = 0.0
    heading = wrap_angle(plan.start_heading if plan.start_heading is not None else first_bearing)

    pose = Pose(waypoints[0][0], waypoints[0][1], heading)
    phases = []
    for (x0, y0), (x1, y1) in zip(waypoints, waypoints[1:], strict=False):
        distance = math.hypot(x1 - x0, y1 - y0)
        if distance == 0.0:
            continue
        bearing = math.atan2(y1 - y0, x1 - x0)
        rotation = wrap_angle(bearing - pose.theta)
        if rotation != 0.0:
            phases.append((pose, rotation, 0.0, abs(rotation) / plan.turn_rate))
            pose = Pose(pose.x, pose.y, bearing)
        phases.append((pose, 0.0, distance, distance / plan.speed))
        pose = Pose(x1, y1, bearing)
    if not phases:
        phases.append((pose, 0.0, 0.0, 0.0))
    return phases


def _sample_path(plan: FlightPlan) -> list[Pose]:
    phases = _phases(plan)
    durations = np.array([p[3] for p in phases])
    ends = np.cumsum(durations)
    total = float(ends[-1])
    ticks = int(math.floor(total * plan.frame_rate + 1e-9)) + 1

    poses = []
    for k in range(ticks):
        t = k / plan.frame_rate
        i = min(int(np.searchsorted(ends, t, side='left')), len(phases) - 1)
        start, rotation, distance, duration = phases[i]
        elapsed = t - (float(ends[i]) - duration)
        fraction = min(max(elapsed / duration, 0.0), 1.0) if duration > 0 else 1.0
        if distance > 0.0:
            step = distance * fraction
            poses.append(
                Pose(start.x + step * math.cos(start.theta), start.y + step * math.sin(start.theta), start.theta)
            )
        else:
            poses.append(Pose(start.x, start.y, wrap_angle(start.theta + rotation * fraction)))
    return poses


def simulate_flight(world: World, plan: FlightPlan, image_size: tuple[int, int] | None = None) -> FlightRecord:
    """
    Fly ``plan`` through ``world``; deterministic given the world and ``plan.seed``.

    Raises:
        WaypointOutOfBoundsError: If a waypoint lies outside the world
        FlightPlanError: If a waypoint lies inside a shelf, or the redundancy bound is
                         exceeded while ``plan.strict`` is set
    """
    _check_waypoints(world, plan)
    poses = _sample_path(plan)
    rng = np.random.default_rng(plan.seed)
    sigma_xy, sigma_theta = plan.odom_noise

    frames: list[Frame] = []
    odometry: list[OdometrySample] = []
    for k, pose in enumerate(trackerator(poses, len(poses), 'Rendering flight')):
        t = k / plan.frame_rate
        image = np.round(render(world, pose, image_size) * 255.0).astype(np.uint8)
        frames.append(Frame.from_image(k, t, image))
        if k == 0:
            odometry.append(OdometrySample(t, 0.0, 0.0, 0.0))
            continue
        delta = poses[k - 1].between(pose)
        noise = rng.normal(0.0, 1.0, size=3) * (sigma_xy, sigma_xy, sigma_theta)
        odometry.append(OdometrySample(t, delta.x + noise[0], delta.y + noise[1], delta.theta + noise[2]))

    record = FlightRecord(
        frames=frames,
        odometry=odometry,
        ground_truth=np.array([(k / plan.frame_rate, p.x, p.y) for k, p in enumerate(poses)], dtype=np.float64),
        headings=np.array([p.theta for p in poses], dtype=np.float64),
        frame_rate=plan.frame_rate,
    )

    deltas = record.frame_deltas()
    worst = float(deltas.max()) if deltas.size else 0.0
    if worst > plan.redundancy_bound:
        message = (
            f'Consecutive frames differ by up to {worst:.3f} per pixel (bound {plan.redundancy_bound}); '
            'raise the frame rate or lower the speed'
        )
        if plan.strict:
            raise FlightPlanError(message)
        logger.warning(message)
    logger.info(f'Simulated {len(record)} ticks at {plan.frame_rate:g} Hz, max frame delta {worst:.4f}')
    return record
