"""
Experience map: pose-stamped nodes joined by odometric and loop-closure links.

Experiences are created on the template sampling clock. A loop closure adds a
zero-offset link between the new experience and the matched one, then the map is
relaxed: every experience moves by a fraction of the mean disagreement between its
pose and the poses its incident links imply.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from qbslam.core.matcher.templates import LoopClosure
from qbslam.core.models.pose import ORIGIN, Pose, wrap_angle, wrap_angles
from qbslam.exceptions.config import ConfigurationError
from qbslam.exceptions.mapping import MapError, UnknownExperienceError
from qbslam.utils.logging import get_configured_logger

logger = get_configured_logger('ExperienceMap')


class LinkKind(StrEnum):
    ODOMETRIC = 'odometric'
    LOOP_CLOSURE = 'loop_closure'


@dataclass(frozen=True)
class BackendParams:
    """Relaxation step fraction and iteration budget per loop closure."""

    alpha: float = 0.5
    iterations: int = 20
    max_halvings: int = 30

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ConfigurationError(f'alpha must lie in (0, 1), got {self.alpha}', config_key='alpha')
        if self.iterations < 0:
            raise ConfigurationError(f'iterations must be ≥ 0, got {self.iterations}', config_key='iterations')
        if self.max_halvings < 0:
            raise ConfigurationError(f'max_halvings must be ≥ 0, got {self.max_halvings}', config_key='max_halvings')


@dataclass(frozen=True)
class Experience:
    experience_id: int
    pose: Pose
    created_at: float


@dataclass(frozen=True)
class MapLink:
    """Directed constraint: ``to_id`` should sit at ``from_id`` composed with ``rel_pose``."""

    from_id: int
    to_id: int
    rel_pose: Pose
    kind: LinkKind

    def __post_init__(self) -> None:
        if self.from_id == self.to_id:
            raise MapError(f'Link endpoints must differ, got {self.from_id} → {self.to_id}')
        if not self.rel_pose.is_finite():
            raise MapError(f'Link {self.from_id} → {self.to_id} has a non-finite relative pose')


class ExperienceMap:
    """
    Single-writer experience graph owned by the pipeline.

    Odometric links always join consecutive experiences, so they form one chain in
    creation order. :meth:`copy` gives readers an independent snapshot.
    """

    def __init__(self) -> None:
        self._poses: list[Pose] = []
        self._created_at: list[float] = []
        self._links: list[MapLink] = []
        self.current_id: int | None = None

    @classmethod
    def from_parts(cls, experiences: Iterable[Experience], links: Iterable[MapLink]) -> ExperienceMap:
        """
        Rebuild a map from explicit experiences and links.

        Raises:
            MapError: If ids are not 0..n−1 in order or an odometric link skips ahead
            UnknownExperienceError: If a link references a missing experience
        """
        exp_map = cls()
        for expected_id, experience in enumerate(experiences):
            if experience.experience_id != expected_id:
                raise MapError(f'Experience ids must run 0..n-1 in order, got {experience.experience_id}')
            exp_map._append(experience.pose, experience.created_at)
        for link in links:
            exp_map._require(link.from_id)
            exp_map._require(link.to_id)
            if link.kind is LinkKind.ODOMETRIC and link.to_id != link.from_id + 1:
                raise MapError(f'Odometric link {link.from_id} → {link.to_id} breaks the creation-order chain')
            exp_map._links.append(link)
        return exp_map

    def __len__(self) -> int:
        return len(self._poses)

    def _append(self, pose: Pose, timestamp: float) -> int:
        experience_id = len(self._poses)
        self._poses.append(Pose(pose.x, pose.y, wrap_angle(pose.theta)))
        self._created_at.append(timestamp)
        self.current_id = experience_id
        return experience_id

    def _require(self, experience_id: int) -> None:
        if not 0 <= experience_id < len(self._poses):
            raise UnknownExperienceError(f'Unknown experience {experience_id}', experience_id=experience_id)

    # ── Structure ────────────────────────────────────────────────────────────

    def add_experience(self, pose: Pose, timestamp: float) -> Experience:
        """Create an experience at ``pose``, linked odometrically to the current one."""
        previous_id = self.current_id
        new_id = self._append(pose, timestamp)
        if previous_id is not None:
            rel = self._poses[previous_id].between(self._poses[new_id])
            self._links.append(MapLink(previous_id, new_id, rel, LinkKind.ODOMETRIC))
        return self.experience(new_id)

    def add_loop_link(self, from_id: int, to_id: int) -> MapLink:
        """Link two experiences that show the same place (zero relative pose)."""
        self._require(from_id)
        self._require(to_id)
        link = MapLink(from_id, to_id, ORIGIN, LinkKind.LOOP_CLOSURE)
        self._links.append(link)
        return link

    def experience(self, experience_id: int) -> Experience:
        self._require(experience_id)
        return Experience(experience_id, self._poses[experience_id], self._created_at[experience_id])

    @property
    def experiences(self) -> tuple[Experience, ...]:
        return tuple(Experience(i, pose, t) for i, (pose, t) in enumerate(zip(self._poses, self._created_at, strict=True)))

    @property
    def links(self) -> tuple[MapLink, ...]:
        return tuple(self._links)

    @property
    def loop_closure_count(self) -> int:
        return sum(1 for link in self._links if link.kind is LinkKind.LOOP_CLOSURE)

    def copy(self) -> ExperienceMap:
        clone = ExperienceMap()
        clone._poses = list(self._poses)
        clone._created_at = list(self._created_at)
        clone._links = list(self._links)
        clone.current_id = self.current_id
        return clone

    # ── Arrays for relaxation ────────────────────────────────────────────────

    def pose_array(self) -> np.ndarray:
        return np.array(self._poses, dtype=np.float64).reshape(-1, 3)

    def set_pose_array(self, poses: np.ndarray) -> None:
        if poses.shape != (len(self._poses), 3):
            raise MapError(f'Expected a {len(self._poses)}x3 pose array, got {poses.shape}')
        self._poses = [Pose(float(x), float(y), float(t)) for x, y, t in poses]

    def link_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Link tails, heads and relative poses as arrays."""
        tails = np.array([link.from_id for link in self._links], dtype=np.intp)
        heads = np.array([link.to_id for link in self._links], dtype=np.intp)
        rel = np.array([link.rel_pose for link in self._links], dtype=np.float64).reshape(-1, 3)
        return tails, heads, rel

    # ── Export ───────────────────────────────────────────────────────────────

    def to_rows(self) -> list[list[float | int]]:
        """Rows ``experience_id, x, y, theta``."""
        return [[i, pose.x, pose.y, pose.theta] for i, pose in enumerate(self._poses)]

    def link_rows(self) -> list[list[int | str]]:
        """Rows ``from, to, kind``."""
        return [[link.from_id, link.to_id, str(link.kind)] for link in self._links]


# ── Relaxation ───────────────────────────────────────────────────────────────


def _residuals(poses: np.ndarray, tails: np.ndarray, heads: np.ndarray, rel: np.ndarray) -> np.ndarray:
    """Implied head pose minus actual head pose, per link (angle wrapped)."""
    tail = poses[tails]
    head = poses[heads]
    c, s = np.cos(tail[:, 2]), np.sin(tail[:, 2])
    implied_x = tail[:, 0] + c * rel[:, 0] - s * rel[:, 1]
    implied_y = tail[:, 1] + s * rel[:, 0] + c * rel[:, 1]
    return np.column_stack((
        implied_x - head[:, 0],
        implied_y - head[:, 1],
        wrap_angles(tail[:, 2] + rel[:, 2] - head[:, 2]),
    ))


def _objective(poses: np.ndarray, tails: np.ndarray, heads: np.ndarray, rel: np.ndarray) -> float:
    if tails.size == 0:
        return 0.0
    r = _residuals(poses, tails, heads, rel)
    return float(np.sum(r * r))


def link_disagreement(exp_map: ExperienceMap) -> float:
    """Sum over links of the squared disagreement between implied and actual poses."""
    return _objective(exp_map.pose_array(), *exp_map.link_arrays())


def relax_map(exp_map: ExperienceMap, alpha: float = 0.5, iterations: int = 20, max_halvings: int = 30) -> list[float]:
    """
    Relax the map in place with simultaneous per-experience corrections.

    Each link pulls its head toward the pose its tail implies and pushes the tail the
    opposite way; an experience moves by ``alpha`` times the mean of the pulls on it.
    A step that would raise the total disagreement is halved until it does not; if
    ``max_halvings`` halvings are not enough the iteration leaves the map unchanged.

    Returns:
        Total link disagreement before the first iteration and after each iteration
    """
    tails, heads, rel = exp_map.link_arrays()
    poses = exp_map.pose_array()
    history = [_objective(poses, tails, heads, rel)]
    if tails.size == 0 or len(exp_map) < 2:
        history.extend(history[0] for _ in range(iterations))
        return history

    n = len(exp_map)
    counts = np.bincount(tails, minlength=n) + np.bincount(heads, minlength=n)
    counts = np.maximum(counts, 1)

    for _ in range(iterations):
        current = history[-1]
        r = _residuals(poses, tails, heads, rel)
        pull = np.zeros((n, 3))
        np.add.at(pull, heads, r)
        np.add.at(pull, tails, -r)
        step = alpha * pull / counts[:, None]

        accepted = poses
        best = current
        for _ in range(max_halvings + 1):
            candidate = poses + step
            candidate[:, 2] = wrap_angles(candidate[:, 2])
            value = _objective(candidate, tails, heads, rel)
            if value <= current:
                accepted, best = candidate, value
                break
            step *= 0.5
        poses = accepted
        history.append(best)

    exp_map.set_pose_array(poses)
    return history


def on_sample(
    exp_map: ExperienceMap,
    pose: Pose,
    loop: LoopClosure | None,
    timestamp: float,
    params: BackendParams | None = None,
) -> Experience:
    """
    Create the experience for a sampling tick and, on a loop closure, link and relax.

    Returns:
        The new experience with its pose after any relaxation

    Raises:
        UnknownExperienceError: If the loop closure points at a missing experience
    """
    params = params or BackendParams()
    if loop is not None:
        exp_map.experience(loop.experience_id)

    experience = exp_map.add_experience(pose, timestamp)
    if loop is None:
        return experience

    exp_map.add_loop_link(experience.experience_id, loop.experience_id)
    history = relax_map(exp_map, params.alpha, params.iterations, params.max_halvings)
    logger.info(
        f'Loop closure {experience.experience_id} → {loop.experience_id} '
        f'(similarity {loop.similarity:.3f}): disagreement {history[0]:.4g} → {history[-1]:.4g}'
    )
    return exp_map.experience(experience.experience_id)


__all__ = [
    'BackendParams',
    'Experience',
    'ExperienceMap',
    'LinkKind',
    'MapLink',
    'link_disagreement',
    'on_sample',
    'relax_map',
]
