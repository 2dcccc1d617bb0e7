"""Base exception hierarchy for all qbslam modules."""


class QbslamError(Exception):
    """Base exception for all qbslam errors."""


class NumericalError(QbslamError):
    """Base exception for numerical failures in coding, learning and surprise tracking."""


class ModelError(QbslamError):
    """Base exception for malformed domain values (frames, dictionaries, codes)."""
