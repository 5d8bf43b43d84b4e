"""
Logging Configuration

Sets up logging for the hicmapper pipeline:
- Terminal output with colors (stderr, so result files piped to stdout stay clean)
- Optional file logging that clears on each run
- Component loggers under the package logger
"""

import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import Optional

ROOT_LOGGER_NAME = "hicmapper"


class ColoredFormatter(logging.Formatter):
    """Custom formatter with colors for terminal output"""

    # ANSI color codes
    COLORS = {
        'DEBUG': '\033[36m',      # Cyan
        'INFO': '\033[32m',       # Green
        'WARNING': '\033[33m',    # Yellow
        'ERROR': '\033[31m',      # Red
        'CRITICAL': '\033[35m',   # Magenta
    }
    RESET = '\033[0m'

    def format(self, record):
        # Copy so the file handler still sees the plain level name
        log_record = logging.makeLogRecord(record.__dict__)
        levelname = log_record.levelname
        if levelname in self.COLORS:
            log_record.levelname = f"{self.COLORS[levelname]}{levelname}{self.RESET}"

        return super().format(log_record)


def setup_logging(
    log_file: Optional[str] = None,
    level: int = logging.INFO,
    clear_on_start: bool = True
) -> logging.Logger:
    """
    Setup the package logger.

    Args:
        log_file: Path to a detailed log file, or None for terminal only
        level: Logging level (DEBUG, INFO, WARNING, ERROR)
        clear_on_start: Clear log file on startup

    Returns:
        The package logger
    """
    logger = logging.getLogger(ROOT_LOGGER_NAME)
    logger.setLevel(level)

    # Remove existing handlers to avoid duplicates
    for handler in logger.handlers[:]:
        logger.removeHandler(handler)
        handler.close()

    # ====================
    # TERMINAL HANDLER (with colors)
    # ====================
    terminal_handler = logging.StreamHandler(sys.stderr)
    terminal_handler.setLevel(level)
    terminal_handler.setFormatter(ColoredFormatter('%(levelname)s | %(message)s'))
    logger.addHandler(terminal_handler)

    # ====================
    # FILE HANDLER (detailed)
    # ====================
    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        if clear_on_start and log_path.exists():
            log_path.unlink()

        file_handler = logging.FileHandler(log_path, mode='a', encoding='utf-8')
        file_handler.setLevel(logging.DEBUG)  # File gets everything
        file_handler.setFormatter(logging.Formatter(
            '%(asctime)s | %(name)s | %(levelname)s | %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        ))
        logger.addHandler(file_handler)
        # File handler wants DEBUG even when the terminal does not
        logger.setLevel(min(level, logging.DEBUG))

    logger.propagate = False

    logger.debug("=" * 80)
    logger.debug(f"HICMAPPER - {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
    if log_file:
        logger.debug(f"📝 Logging to: {log_file}")
    logger.debug(f"📊 Log level: {logging.getLevelName(level)}")
    logger.debug("=" * 80)

    return logger


def get_component_logger(component_name: str) -> logging.Logger:
    """
    Get a logger for a specific component

    Args:
        component_name: Name of the component (e.g., 'cli', 'bootstrap')

    Returns:
        Component-specific logger under the package logger
    """
    return logging.getLogger(f"{ROOT_LOGGER_NAME}.{component_name}")


def log_section_header(logger: logging.Logger, title: str, width: int = 80):
    """
    Log a formatted section header

    Args:
        logger: Logger instance
        title: Section title
        width: Width of the header line
    """
    logger.info("=" * width)
    logger.info(f" {title}")
    logger.info("=" * width)
