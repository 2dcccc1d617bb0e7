"""
Event models for the SLAM pipeline.
Published once per encoded frame and once per accepted loop closure.
"""

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class FrameEncodedEvent:
    """
    Event published after the learning block of frame ``k``.

    ``gate_open`` is the surprise verdict computed at this step, i.e. the gate the next
    frame will learn under. ``learned`` says whether the dictionary moved on this frame.
    """

    k: int
    timestamp: float
    error: float
    s2_raw: float | None
    s2_filtered: float
    gate_open: bool
    learned: bool

    def __post_init__(self):
        """Validate event data on creation."""
        if self.k < 0:
            raise ValueError('Frame index cannot be negative')
        if not math.isfinite(self.error) or self.error < 0:
            raise ValueError(f'Reprojection error must be finite and non-negative, got {self.error}')

    def __repr__(self) -> str:
        gate = 'open' if self.gate_open else 'closed'
        return f'FrameEncodedEvent(k={self.k}, e={self.error:.4g}, s2={self.s2_filtered:.4g}, gate={gate})'


@dataclass(frozen=True)
class LoopClosureEvent:
    """Event published when the current code matches a stored template above threshold."""

    experience_id: int
    template_id: int
    matched_experience_id: int
    similarity: float
    timestamp: float

    def __post_init__(self):
        """Validate event data on creation."""
        if self.experience_id == self.matched_experience_id:
            raise ValueError('A loop closure cannot link an experience to itself')

    def __repr__(self) -> str:
        return (
            f'LoopClosureEvent({self.experience_id} -> {self.matched_experience_id}, '
            f'template={self.template_id}, sim={self.similarity:.4f})'
        )
