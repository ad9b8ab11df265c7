"""
Utility functions and classes.
"""
from .debug_logger import debug_logger, DebugLogger, LogConfig
from .init_logger import (
    init_logger,
    disable_logger,
    enable_logger,
    set_log_level,
    get_logger
)

__all__ = [
    'debug_logger',
    'DebugLogger',
    'LogConfig',
    'init_logger',
    'disable_logger',
    'enable_logger',
    'set_log_level',
    'get_logger',
]
