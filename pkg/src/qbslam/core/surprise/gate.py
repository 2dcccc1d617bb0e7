"""
Quadratic Bayesian Surprise gate.

The raw surprise at step k is the difference of consecutive reprojection errors,
S₂ = e_k − e_{k−1}. It is smoothed by a causal moving average over the last W raw
values and the dictionary may learn only while the smoothed value is strictly positive.
The decision computed at step k gates the learning block of step k+1.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from qbslam.core.dlsc.encoder import EncoderState, SparseCode, dictionary_step, encode, reprojection_error
from qbslam.core.models.frame import Frame
from qbslam.exceptions.config import ConfigurationError
from qbslam.exceptions.numerics import CodingDivergenceError, SurpriseInputError
from qbslam.utils.logging import get_configured_logger

logger = get_configured_logger('Surprise')

DEFAULT_WINDOW = 5


class GateDecision(NamedTuple):
    """Smoothed surprise, the verdict derived from it, and the inputs that produced it."""

    s2: float
    learn: bool
    s2_raw: float | None
    error: float


@dataclass
class SurpriseState:
    """Surprise history of one stream. Serialised together with its :class:`EncoderState`."""

    window: int = DEFAULT_WINDOW
    raw_history: deque[float] = field(init=False)
    prev_error: float | None = None
    s2_filtered: float = 1.0
    initialized: bool = False

    def __post_init__(self) -> None:
        if self.window < 1:
            raise ConfigurationError(f'Surprise window must be ≥ 1, got {self.window}', config_key='window')
        self.raw_history = deque(maxlen=self.window)

    @property
    def gate_open(self) -> bool:
        """Whether the next learning block may update the dictionary."""
        return self.s2_filtered > 0.0


def qbs_raw(e_curr: float, e_prev: float) -> float:
    """Raw quadratic surprise ``e_curr − e_prev``."""
    return e_curr - e_prev


def qbs_update(state: SurpriseState, e_curr: float) -> GateDecision:
    """
    Push the surprise of ``e_curr`` into the window and return the new verdict.

    The first call only records the error: the smoothed surprise keeps its initial
    value of 1 so the stream starts out learning.

    Raises:
        SurpriseInputError: If ``e_curr`` is negative or not finite
    """
    if not math.isfinite(e_curr) or e_curr < 0.0:
        raise SurpriseInputError(f'Reprojection error must be finite and ≥ 0, got {e_curr!r}', value=e_curr)

    if not state.initialized or state.prev_error is None:
        state.prev_error = e_curr
        state.initialized = True
        return GateDecision(s2=state.s2_filtered, learn=state.gate_open, s2_raw=None, error=e_curr)

    raw = qbs_raw(e_curr, state.prev_error)
    state.raw_history.append(raw)
    state.s2_filtered = math.fsum(state.raw_history) / len(state.raw_history)
    state.prev_error = e_curr
    return GateDecision(s2=state.s2_filtered, learn=state.s2_filtered > 0.0, s2_raw=raw, error=e_curr)


def gated_learning_step(
    enc: EncoderState,
    sur: SurpriseState,
    s: Frame,
    *,
    gating: bool = True,
) -> tuple[SparseCode, GateDecision]:
    """
    Process one frame: code it, learn if the previous verdict allows it, then update the surprise.

    The reprojection error feeding the surprise is measured with the dictionary the
    code was inferred with, before this step's learning block. While the gate is
    closed the dictionary object is left untouched.

    Args:
        enc: Encoder state of the stream (mutated)
        sur: Surprise state of the same stream (mutated)
        s: Current frame
        gating: When False, learn on every step while still computing the surprise

    Returns:
        The code of ``s`` and the surprise verdict computed at this step

    Raises:
        CodingDivergenceError: If the code or its reprojection error is not finite
        DictionaryDivergenceError: If a dictionary step produces non-finite atoms
    """
    learn_now = sur.gate_open or not gating

    code = encode(enc, s)
    with np.errstate(over='ignore', invalid='ignore'):
        error = reprojection_error(enc.dictionary, code, s)
    if not math.isfinite(error):
        raise CodingDivergenceError(f'Reprojection error overflowed at frame {s.index}', frame_index=s.index)

    if learn_now:
        params = enc.params
        for _ in range(params.n_d):
            enc.dictionary = dictionary_step(
                enc.dictionary, code, s, params.eta_d, clip_atom_norm=params.clip_atom_norm
            )

    decision = qbs_update(sur, error)
    enc.prev_error = error
    enc.frames_seen += 1
    return code, decision
