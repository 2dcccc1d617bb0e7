"""
qbslam - Surprise-gated dictionary learning and sparse coding for visual SLAM.
"""

import logging
from logging import NullHandler

__version__ = '0.1.0'

# Public API re-exports
from qbslam.core.pipeline import RunConfig, SlamPipeline, generate_dataset, run_slam
from qbslam.utils.logging import configure_logging, enable_verbose_logging, log_and_display, log_manager, trackerator
from qbslam.utils.settings import QbslamSettings

# Prevent "No handler found" warnings for the package logger itself
logging.getLogger(__name__).addHandler(NullHandler())


# --- PUBLIC INTERFACE ---
__all__ = [
    'QbslamSettings',
    'RunConfig',
    'SlamPipeline',
    '__version__',
    'configure_logging',
    'enable_verbose_logging',
    'generate_dataset',
    'log_and_display',
    'log_manager',
    'run_slam',
    'trackerator',
]
