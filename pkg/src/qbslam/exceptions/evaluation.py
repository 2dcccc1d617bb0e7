"""
Evaluation exceptions.
All exceptions inherit from EvaluationError → QbslamError.
"""

from qbslam.exceptions.base import QbslamError


class EvaluationError(QbslamError):
    """Base exception for trajectory evaluation."""


class EmptyTrajectoryError(EvaluationError):
    """A trajectory or point set has no points."""


class MismatchedTrajectoryError(EvaluationError):
    """Two trajectories that must be index-aligned have different lengths."""

    def __init__(self, message: str, lengths: tuple[int, int] | None = None):
        self.lengths = lengths
        super().__init__(message)
