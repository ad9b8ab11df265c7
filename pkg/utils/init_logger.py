"""
Initialize the global toolkit logger.
"""
import logging
import os
from datetime import datetime
from typing import Optional

from .debug_logger import debug_logger


def init_logger(
    log_level: int = logging.WARNING,
    log_to_file: bool = False,
    log_dir: str = "logs",
    log_file: Optional[str] = None,
    json_format: bool = False,
    show_timestamp: bool = True,
    show_level: bool = True,
) -> logging.Logger:
    """
    Initialize the global toolkit logger.

    Args:
        log_level: The logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_to_file: Whether to also log to a rotating file
        log_dir: Directory to store log files
        log_file: Name of the log file (defaults to timestamp-based name)
        json_format: Emit one JSON object per record
        show_timestamp: Whether to show timestamps in logs
        show_level: Whether to show log levels in logs
    """
    if log_file is None:
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        log_file = f"atomkit_{timestamp}.log"

    debug_logger.configure(
        enabled=True,
        level=log_level,
        json_format=json_format,
        show_timestamp=show_timestamp,
        show_level=show_level,
        log_to_file=log_to_file,
        log_file=log_file,
        log_dir=log_dir,
    )

    log = debug_logger.get_logger()
    log.debug(f"Log level: {logging.getLevelName(log_level)}")
    if log_to_file:
        log.debug(f"Log file: {os.path.join(log_dir, log_file)}")
    return log


def disable_logger() -> None:
    """Disable the global logger."""
    debug_logger.disable()


def enable_logger() -> None:
    """Enable the global logger."""
    debug_logger.enable()


def set_log_level(level: int) -> None:
    """Set the logging level."""
    debug_logger.set_level(level)


def get_logger() -> logging.Logger:
    """Get the global logger instance."""
    return debug_logger.get_logger()
