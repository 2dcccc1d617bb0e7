"""
Exceptions raised when event delivery fails during a pipeline stage.
All exceptions inherit from QbslamError.
"""

from qbslam.exceptions.base import QbslamError


class EventDeliveryError(QbslamError):
    """One or more subscribers raised while a stage published its events."""

    def __init__(self, message: str, stage: str | None = None, failures: int = 0):
        self.stage = stage
        self.failures = failures
        super().__init__(message)
