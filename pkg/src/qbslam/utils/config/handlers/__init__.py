from qbslam.utils.config.handlers.base import BaseFormatHandler
from qbslam.utils.config.handlers.json_handler import JsonHandler
from qbslam.utils.config.handlers.keyvalue_handler import KeyValueHandler

__all__ = [
    'BaseFormatHandler',
    'JsonHandler',
    'KeyValueHandler',
]
