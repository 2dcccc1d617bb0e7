from qbslam.core.evaluation.alignment import (
    IDENTITY,
    AlignmentResult,
    AlignmentTransform,
    GridSpec,
    align_by_grid_search,
    apply_transform,
)
from qbslam.core.evaluation.metrics import MetricsReport, Trajectory, associate, mae_localisation, mae_mapping

__all__ = [
    'IDENTITY',
    'AlignmentResult',
    'AlignmentTransform',
    'GridSpec',
    'MetricsReport',
    'Trajectory',
    'align_by_grid_search',
    'apply_transform',
    'associate',
    'mae_localisation',
    'mae_mapping',
]
