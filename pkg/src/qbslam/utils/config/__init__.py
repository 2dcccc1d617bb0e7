from qbslam.utils.config.loader import ConfigLoader

__all__ = ['ConfigLoader']
