"""
logger.py: Centralized Logging Setup

This module provides a reusable `setup_logging` function to configure consistent logging
across the wcolab modules. Every module asks for its own named logger so the group, norm and
verification traces can be split into separate files.

Features:
---------
- Dynamic logger names (one per module, all under the "wcolab." prefix)
- Configurable log file output
- File + console logging
- Level taken from WCOLAB_LOG_LEVEL unless passed explicitly
- Prevents duplicate handlers on repeated imports
"""

import logging
from pathlib import Path
from typing import Optional, Union

from src.config import Config


def setup_logging(
    log_file: Optional[Union[str, Path]] = None,
    level: Optional[int] = None,
    logger_name: str = "wcolab.default",
) -> logging.Logger:
    """
    Sets up and returns a logger configured with both file and console handlers.

    Args:
        log_file (str | Path | None): Full path to the log file. If None, logging only to console.
        level (int | None): Logging level. Defaults to Config.get_log_level().
        logger_name (str): Unique name for the logger. Prevents log contamination across modules.

    Returns:
        logging.Logger: Configured logger instance.
    """
    logger = logging.getLogger(logger_name)
    logger.setLevel(level if level is not None else Config.get_log_level())

    # Avoid adding multiple handlers if already set
    if logger.handlers:
        return logger

    formatter = logging.Formatter("%(asctime)s [%(levelname)s] %(name)s: %(message)s")

    console_handler = logging.StreamHandler()
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)

        file_handler = logging.FileHandler(log_path)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

        logger.debug(f"Logging initialized. Output -> {log_path}")

    return logger
