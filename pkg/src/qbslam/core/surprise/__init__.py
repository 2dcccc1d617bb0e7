from qbslam.core.surprise.gate import (
    DEFAULT_WINDOW,
    GateDecision,
    SurpriseState,
    gated_learning_step,
    qbs_raw,
    qbs_update,
)

__all__ = ['DEFAULT_WINDOW', 'GateDecision', 'SurpriseState', 'gated_learning_step', 'qbs_raw', 'qbs_update']
