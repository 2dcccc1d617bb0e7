"""Configuration exceptions."""

from qbslam.exceptions.base import QbslamError


class ConfigurationError(QbslamError):
    """Configuration issues (unknown keys, out-of-range values, unreadable files)."""

    def __init__(self, message: str, config_key: str | None = None):
        self.config_key = config_key
        super().__init__(message)
