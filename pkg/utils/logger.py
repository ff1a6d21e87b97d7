"""
Logging setup for the adaptive optimizer
Provides structured logging for experiment runs and debugging
"""

import functools
import logging
import os
import time
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional

from rich.logging import RichHandler

LOGGER_NAME = "adaptive_hpo"


def setup_logger(
    name: str = LOGGER_NAME,
    log_level: Optional[str] = None,
    log_dir: Optional[Path] = None,
) -> logging.Logger:
    """
    Set up structured logging for the application

    Args:
        name: Logger name
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR)
        log_dir: Directory for the log files, ``logs/`` by default

    Returns:
        Configured logger instance
    """

    # Get log level from environment or default to INFO
    if log_level is None:
        log_level = os.getenv('LOG_LEVEL', 'INFO').upper()

    log_dir = Path(log_dir) if log_dir is not None else Path('logs')
    log_dir.mkdir(parents=True, exist_ok=True)

    logger = logging.getLogger(name)
    logger.setLevel(logging.DEBUG)
    logger.propagate = False

    # Remove existing handlers to avoid duplicates
    for handler in logger.handlers[:]:
        logger.removeHandler(handler)
        handler.close()

    detailed_formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(module)s:%(lineno)d - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    # Detailed file log
    stamp = datetime.now().strftime("%Y%m%d")
    log_file = log_dir / f'adaptive_hpo_{stamp}.log'
    file_handler = logging.FileHandler(log_file)
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(detailed_formatter)
    logger.addHandler(file_handler)

    # Console log, rendered by rich
    console_handler = RichHandler(show_path=False, rich_tracebacks=True)
    console_handler.setLevel(getattr(logging, log_level, logging.INFO))
    console_handler.setFormatter(logging.Formatter('%(message)s', datefmt='%H:%M:%S'))
    logger.addHandler(console_handler)

    # Errors only
    error_file = log_dir / f'errors_{stamp}.log'
    error_handler = logging.FileHandler(error_file)
    error_handler.setLevel(logging.ERROR)
    error_handler.setFormatter(detailed_formatter)
    logger.addHandler(error_handler)

    logger.debug(f"Logger initialized - Level: {log_level}")
    logger.debug(f"Log file: {log_file}")
    return logger


def get_logger(module: str) -> logging.Logger:
    """Child logger of the application logger for a module"""
    short = module.rsplit('.', 1)[-1]
    return logging.getLogger(f"{LOGGER_NAME}.{short}")


def log_execution_time(func):
    """
    Decorator to log function execution time

    Usage:
        @log_execution_time
        def run_everything():
            pass
    """

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        logger = logging.getLogger(LOGGER_NAME)
        start_time = time.perf_counter()

        logger.debug(f"Starting execution: {func.__name__}")

        try:
            result = func(*args, **kwargs)
            execution_time = time.perf_counter() - start_time
            logger.info(f"Completed {func.__name__} in {execution_time:.2f}s")
            return result
        except Exception as e:
            execution_time = time.perf_counter() - start_time
            logger.error(f"Failed {func.__name__} after {execution_time:.2f}s: {str(e)}")
            raise

    return wrapper


def _format_stats(stats: Dict[str, Any]) -> str:
    return ", ".join(f"{k}: {v}" for k, v in stats.items())


def log_round(run_id: str, round_index: int, genomes: list, best: float, status: str = "ok"):
    """
    Log one meta-round of an optimization run

    Args:
        run_id: Run identifier (optimizer label and seed)
        round_index: 1-based round number
        genomes: Labels of the genomes that proposed this round's points
        best: Best minimization objective seen so far
        status: ok, fallback or failed
    """
    logger = logging.getLogger(LOGGER_NAME)

    message = f"Round - {run_id} | n: {round_index} | genomes: {','.join(genomes)} | best: {best:.6g}"
    if status == "failed":
        logger.warning(message + " | some evaluations failed")
    elif status == "fallback":
        logger.warning(message + " | random fallback used")
    else:
        logger.debug(message)


def log_run_stats(run_id: str, stats: Dict[str, Any]):
    """
    Log summary statistics of a finished run

    Args:
        run_id: Run identifier
        stats: Dictionary of statistics
    """
    logger = logging.getLogger(LOGGER_NAME)
    logger.info(f"Run Stats - {run_id} | {_format_stats(stats)}")
