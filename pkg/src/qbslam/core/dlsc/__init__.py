from qbslam.core.dlsc.checkpoint import load_dictionary, save_dictionary
from qbslam.core.dlsc.encoder import (
    Dictionary,
    DlscParams,
    EncoderState,
    SparseCode,
    coding_objective,
    dictionary_step,
    encode,
    init_dictionary,
    replay_errors,
    reprojection_error,
    soft_threshold,
)

__all__ = [
    'Dictionary',
    'DlscParams',
    'EncoderState',
    'SparseCode',
    'coding_objective',
    'dictionary_step',
    'encode',
    'init_dictionary',
    'load_dictionary',
    'replay_errors',
    'reprojection_error',
    'save_dictionary',
    'soft_threshold',
]
