"""
Numerical exceptions raised by the DLSC encoder and the surprise gate.
All exceptions inherit from NumericalError → QbslamError.
"""

from qbslam.exceptions.base import NumericalError


class DivergenceError(NumericalError):
    """Non-finite values appeared while processing a frame."""

    def __init__(self, message: str, frame_index: int | None = None, iteration: int | None = None):
        self.frame_index = frame_index
        self.iteration = iteration
        super().__init__(message)


class CodingDivergenceError(DivergenceError):
    """Proximal-gradient coding produced a non-finite code."""


class DictionaryDivergenceError(DivergenceError):
    """A dictionary step produced non-finite atoms."""


class DimensionMismatchError(NumericalError):
    """Operands of a DLSC operation do not agree in shape."""

    def __init__(self, message: str, expected: tuple[int, ...] | None = None, actual: tuple[int, ...] | None = None):
        self.expected = expected
        self.actual = actual
        super().__init__(message)


class SurpriseInputError(NumericalError):
    """The surprise gate received a non-finite or negative reprojection error."""

    def __init__(self, message: str, value: float | None = None):
        self.value = value
        super().__init__(message)
