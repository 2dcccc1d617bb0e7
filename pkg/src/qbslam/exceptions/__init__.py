from qbslam.exceptions.base import ModelError, NumericalError, QbslamError
from qbslam.exceptions.config import ConfigurationError
from qbslam.exceptions.datasets import (
    DatasetError,
    DatasetLayoutError,
    FlightPlanError,
    SequenceGapError,
    UnknownScenarioError,
    WaypointOutOfBoundsError,
)
from qbslam.exceptions.evaluation import EmptyTrajectoryError, EvaluationError, MismatchedTrajectoryError
from qbslam.exceptions.events import EventDeliveryError
from qbslam.exceptions.mapping import MapError, UnknownExperienceError
from qbslam.exceptions.models import InvalidDictionaryError, InvalidFrameError, ZeroNormCodeError
from qbslam.exceptions.numerics import (
    CodingDivergenceError,
    DictionaryDivergenceError,
    DimensionMismatchError,
    DivergenceError,
    SurpriseInputError,
)

__all__ = [
    'CodingDivergenceError',
    'ConfigurationError',
    'DatasetError',
    'DatasetLayoutError',
    'DictionaryDivergenceError',
    'DimensionMismatchError',
    'DivergenceError',
    'EmptyTrajectoryError',
    'EventDeliveryError',
    'EvaluationError',
    'FlightPlanError',
    'InvalidDictionaryError',
    'InvalidFrameError',
    'MapError',
    'MismatchedTrajectoryError',
    'ModelError',
    'NumericalError',
    'QbslamError',
    'SequenceGapError',
    'SurpriseInputError',
    'UnknownExperienceError',
    'UnknownScenarioError',
    'WaypointOutOfBoundsError',
    'ZeroNormCodeError',
]
