"""
Exceptions for malformed frames, dictionaries and codes.
All exceptions inherit from ModelError → QbslamError.
"""

from qbslam.exceptions.base import ModelError


class InvalidFrameError(ModelError):
    """Frame pixels, shape or ordering violate the frame contract."""

    def __init__(self, message: str, frame_index: int | None = None):
        self.frame_index = frame_index
        super().__init__(message)


class InvalidDictionaryError(ModelError):
    """Dictionary shape or contents are invalid (e.g. not under-complete)."""

    def __init__(self, message: str, shape: tuple[int, ...] | None = None):
        self.shape = shape
        super().__init__(message)


class ZeroNormCodeError(ModelError):
    """A code with zero norm was used where a direction is required."""
