"""
Latent-code template store and cosine-similarity loop-closure detection.

Templates are sampled from the code stream on a fixed clock. A query code is
compared against every template older than the exclusion window, optionally narrowed
to templates whose experience is consistent with the live pose estimate; the single
best match is reported when its similarity reaches the threshold μ.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from threading import Lock
from typing import NamedTuple

import numpy as np

from qbslam.core.dlsc.encoder import SparseCode
from qbslam.core.models.pose import Pose, wrap_angles
from qbslam.exceptions.config import ConfigurationError
from qbslam.exceptions.models import ZeroNormCodeError
from qbslam.utils.logging import get_configured_logger

logger = get_configured_logger('Matcher')

CLOCK_TOLERANCE = 1e-9


@dataclass(frozen=True)
class MatcherParams:
    """
    Template sampling and matching parameters.

    ``mu`` above 1 is accepted and disables loop closures, since cosine similarity never exceeds 1.

    A template is a candidate only if its experience lies within the search radius of the
    live pose and within ``heading_tolerance`` radians of its heading. The radius starts at
    ``search_radius`` meters after every loop closure and widens by ``radius_growth`` per
    meter of odometry since. ``search_radius=None`` matches against every template.
    """

    mu: float = 0.9
    sample_period: float = 0.1
    exclusion_window: float = 10.0
    search_radius: float | None = 1.5
    radius_growth: float = 0.06
    heading_tolerance: float = 0.75

    def __post_init__(self) -> None:
        if not self.mu > 0:
            raise ConfigurationError(f'mu must be positive, got {self.mu}', config_key='mu')
        if not self.sample_period > 0:
            raise ConfigurationError(f'sample_period must be positive, got {self.sample_period}', config_key='sample_period')
        if not self.exclusion_window >= 0:
            raise ConfigurationError(
                f'exclusion_window must be ≥ 0, got {self.exclusion_window}', config_key='exclusion_window'
            )
        if self.search_radius is not None and not self.search_radius > 0:
            raise ConfigurationError(
                f'search_radius must be positive or none, got {self.search_radius}', config_key='search_radius'
            )
        if not self.radius_growth >= 0:
            raise ConfigurationError(f'radius_growth must be ≥ 0, got {self.radius_growth}', config_key='radius_growth')
        if not 0 < self.heading_tolerance <= math.pi:
            raise ConfigurationError(
                f'heading_tolerance must lie in (0, π], got {self.heading_tolerance}', config_key='heading_tolerance'
            )
        if self.mu > 1.0:
            logger.warning(f'mu={self.mu} > 1: loop closures are disabled')

    def radius_after(self, travelled: float) -> float | None:
        """Search radius after ``travelled`` meters without a loop closure; None when matching is unrestricted."""
        if self.search_radius is None:
            return None
        return self.search_radius + self.radius_growth * travelled


@dataclass(frozen=True, eq=False)
class Template:
    """A code captured from the stream, bound to the experience active at capture."""

    template_id: int
    code: SparseCode
    experience_id: int
    timestamp: float

    def __post_init__(self) -> None:
        if self.code.norm == 0.0:
            raise ZeroNormCodeError(f'Template {self.template_id} has a zero-norm code')


class LoopClosure(NamedTuple):
    template_id: int
    experience_id: int
    similarity: float


def pose_candidates(poses: np.ndarray, pose: Pose, radius: float, heading_tolerance: float) -> np.ndarray:
    """
    Mask of the rows of ``poses`` (x, y, θ) that could be the place seen from ``pose``.

    A row qualifies when it lies within ``radius`` meters of ``pose`` and its heading is
    within ``heading_tolerance`` radians of the pose heading.
    """
    poses = np.asarray(poses, dtype=np.float64).reshape(-1, 3)
    near = np.hypot(poses[:, 0] - pose.x, poses[:, 1] - pose.y) <= radius
    aligned = np.abs(wrap_angles(poses[:, 2] - pose.theta)) <= heading_tolerance
    return near & aligned


def cosine_similarity(a: SparseCode, b: SparseCode) -> float:
    """
    Return aᵀb / (‖a‖‖b‖), clipped to [−1, 1].

    Raises:
        ZeroNormCodeError: If either code has zero norm
    """
    norm_a, norm_b = a.norm, b.norm
    if norm_a == 0.0 or norm_b == 0.0:
        raise ZeroNormCodeError('Cosine similarity is undefined for zero-norm codes')
    return float(np.clip(a.values @ b.values / (norm_a * norm_b), -1.0, 1.0))


class TemplateStore:
    """
    Templates of one stream, plus the sampling clock and the id counter.

    Single writer (the pipeline). Readers take :meth:`snapshot`, which is always a
    consistent prefix of the stored templates.
    """

    def __init__(self, params: MatcherParams | None = None) -> None:
        self.params = params or MatcherParams()
        self._templates: list[Template] = []
        self._unit_codes: np.ndarray | None = None
        self._last_sample_time: float | None = None
        self._next_id = 0
        self._lock = Lock()

    def __len__(self) -> int:
        return len(self._templates)

    @property
    def last_sample_time(self) -> float | None:
        return self._last_sample_time

    def is_due(self, timestamp: float) -> bool:
        """Whether a sample taken at ``timestamp`` falls on the sampling clock."""
        if self._last_sample_time is None:
            return True
        return timestamp - self._last_sample_time >= self.params.sample_period - CLOCK_TOLERANCE

    def maybe_sample(self, code: SparseCode, timestamp: float, experience_id: int) -> Template | None:
        """
        Store ``code`` as a new template when the sampling clock is due.

        A zero-norm code on a due tick advances the clock but is not stored.

        Returns:
            The stored template, or None when nothing was stored
        """
        if self._last_sample_time is not None and timestamp < self._last_sample_time:
            raise ConfigurationError(
                f'Timestamps must be nondecreasing: {timestamp} after {self._last_sample_time}', config_key='timestamp'
            )
        if not self.is_due(timestamp):
            return None

        self._last_sample_time = timestamp
        if code.norm == 0.0:
            logger.warning(f'Zero-norm code at t={timestamp:.3f}: template skipped')
            return None

        template = Template(
            template_id=self._next_id,
            code=code.copy(),
            experience_id=experience_id,
            timestamp=timestamp,
        )
        with self._lock:
            self._templates.append(template)
            self._unit_codes = None
        self._next_id += 1
        return template

    def find_loop_closure(
        self, code: SparseCode, timestamp: float, candidates: np.ndarray | None = None
    ) -> LoopClosure | None:
        """
        Best template older than the exclusion window, if its similarity reaches μ.

        Ties go to the older template.

        Args:
            code: Query code
            timestamp: Query time; templates from the last ``exclusion_window`` seconds are skipped
            candidates: Optional boolean mask over every stored template; False rows are skipped
        """
        norm = code.norm
        if norm == 0.0 or not self._templates:
            return None
        if candidates is not None and len(candidates) != len(self._templates):
            raise ConfigurationError(
                f'Candidate mask has {len(candidates)} entries for {len(self._templates)} templates',
                config_key='candidates',
            )

        cutoff = timestamp - self.params.exclusion_window
        eligible = 0
        for template in self._templates:
            if template.timestamp < cutoff:
                eligible += 1
            else:
                break
        if eligible == 0:
            return None

        similarities = self._unit_matrix()[:eligible] @ (code.values / norm)
        if candidates is not None:
            similarities = np.where(np.asarray(candidates, dtype=bool)[:eligible], similarities, -np.inf)
            if not np.any(np.isfinite(similarities)):
                return None
        best = int(np.argmax(similarities))
        similarity = float(np.clip(similarities[best], -1.0, 1.0))
        if similarity < self.params.mu or math.isnan(similarity):
            return None

        template = self._templates[best]
        return LoopClosure(template.template_id, template.experience_id, similarity)

    def _unit_matrix(self) -> np.ndarray:
        if self._unit_codes is None or self._unit_codes.shape[0] != len(self._templates):
            codes = np.vstack([t.code.values for t in self._templates])
            self._unit_codes = codes / np.linalg.norm(codes, axis=1, keepdims=True)
        return self._unit_codes

    def experience_ids(self) -> np.ndarray:
        """Experience id of every stored template, in storage order."""
        return np.fromiter((t.experience_id for t in self._templates), dtype=np.intp, count=len(self._templates))

    def snapshot(self) -> tuple[Template, ...]:
        with self._lock:
            return tuple(self._templates)

    def to_rows(self) -> list[list[float | int]]:
        """Rows ``template_id, experience_id, timestamp, code...`` for the template dump."""
        return [
            [t.template_id, t.experience_id, t.timestamp, *(float(v) for v in t.code.values)] for t in self.snapshot()
        ]
