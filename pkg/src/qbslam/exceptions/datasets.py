"""
Dataset and flight-simulation exceptions.
All exceptions inherit from DatasetError → QbslamError.
"""

from pathlib import Path

from qbslam.exceptions.base import QbslamError


class DatasetError(QbslamError):
    """Base exception for dataset generation and ingestion."""

    def __init__(self, message: str, dataset_path: str | Path | None = None):
        self.dataset_path = Path(dataset_path) if dataset_path else None
        super().__init__(message)


class DatasetLayoutError(DatasetError):
    """A dataset directory does not follow the on-disk layout."""


class SequenceGapError(DatasetError):
    """Frames are missing or out of order."""

    def __init__(
        self,
        message: str,
        dataset_path: str | Path | None = None,
        expected_index: int | None = None,
        found_index: int | None = None,
    ):
        self.expected_index = expected_index
        self.found_index = found_index
        super().__init__(message, dataset_path)


class UnknownScenarioError(DatasetError):
    """Scenario name is neither built in nor a readable custom spec file."""

    def __init__(self, message: str, scenario: str | None = None):
        self.scenario = scenario
        super().__init__(message)


class FlightPlanError(DatasetError):
    """A flight plan cannot be flown in the given world."""


class WaypointOutOfBoundsError(FlightPlanError):
    """A waypoint lies outside the world bounds."""

    def __init__(self, message: str, waypoint: tuple[float, float] | None = None):
        self.waypoint = waypoint
        super().__init__(message)
