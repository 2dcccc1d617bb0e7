from qbslam.core.models.frame import Frame
from qbslam.core.models.pose import ORIGIN, OdometrySample, Pose, wrap_angle, wrap_angles

__all__ = ['ORIGIN', 'Frame', 'OdometrySample', 'Pose', 'wrap_angle', 'wrap_angles']
