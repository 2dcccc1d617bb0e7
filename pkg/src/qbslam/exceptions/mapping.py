"""
Experience-map exceptions.
All exceptions inherit from MapError → QbslamError.
"""

from qbslam.exceptions.base import QbslamError


class MapError(QbslamError):
    """Base exception for experience-map operations."""


class UnknownExperienceError(MapError):
    """A link or loop closure references an experience that does not exist."""

    def __init__(self, message: str, experience_id: int | None = None):
        self.experience_id = experience_id
        super().__init__(message)
