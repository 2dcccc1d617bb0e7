from qbslam.core.backend.experience_map import (
    BackendParams,
    Experience,
    ExperienceMap,
    LinkKind,
    MapLink,
    link_disagreement,
    on_sample,
    relax_map,
)
from qbslam.core.backend.odometry import dead_reckoning, integrate_odometry

__all__ = [
    'BackendParams',
    'Experience',
    'ExperienceMap',
    'LinkKind',
    'MapLink',
    'dead_reckoning',
    'integrate_odometry',
    'link_disagreement',
    'on_sample',
    'relax_map',
]
