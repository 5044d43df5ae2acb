"""Provide centralized logging for the decoder and the BER harness.

Module Information:
    - Filename: utils_logger.py
    - Module: utils_logger
    - Location: src/anc_decoder/

Key Concepts:
    - One Loguru configuration per process (stderr + rotating log file)
    - Library modules only import ``logger``; the CLI calls ``init_logger``
    - Banner sections to delimit sweep stages in the log
"""

import pathlib
import sys

from loguru import logger

DEFAULT_LOG_FILE_NAME: str = "anc_decoder.log"
LOG_FORMAT: str = "{time:YYYY-MM-DD HH:mm:ss}:{level:<7} AT {file}:{line}: {message}"

_is_configured: bool = False
_log_file_path: pathlib.Path | None = None


def _project_root(start: pathlib.Path | None = None) -> pathlib.Path:
    """Walk up until a pyproject.toml or .git is found.

    Falls back to the directory containing this file.
    """
    here = (start or pathlib.Path(__file__)).resolve()
    for p in [here, *here.parents]:
        if (p / "pyproject.toml").exists() or (p / ".git").exists():
            return p
    return here.parent


project_root = _project_root()


def get_log_file_path() -> pathlib.Path:
    """Return the active log file, or where it will go once initialized."""
    if _log_file_path is not None:
        return _log_file_path
    return project_root / DEFAULT_LOG_FILE_NAME


def init_logger(
    level: str = "INFO",
    *,
    log_dir: str | pathlib.Path = project_root,
    log_file_name: str = DEFAULT_LOG_FILE_NAME,
) -> pathlib.Path:
    """Configure Loguru sinks once per process and return the log file path.

    Args:
        level: Minimum level for both sinks (e.g. "INFO", "DEBUG").
        log_dir: Directory where the log file is written; created if missing.
        log_file_name: File name for the log file.

    Returns:
        pathlib.Path: The log file in use.
    """
    global _is_configured, _log_file_path
    if _is_configured:
        return get_log_file_path()

    log_folder = pathlib.Path(log_dir).expanduser().resolve()
    log_folder.mkdir(parents=True, exist_ok=True)
    log_file = log_folder / log_file_name

    try:
        logger.remove()
        logger.add(sys.stderr, level=level, format=LOG_FORMAT)
        logger.add(
            log_file,
            level=level,
            enqueue=True,
            backtrace=True,
            diagnose=False,
            rotation="10 MB",
            retention="7 days",
            encoding="utf-8",
            format=LOG_FORMAT,
        )
        _is_configured = True
        _log_file_path = log_file
        logger.info(f"Logging to file: {log_file}")
    except Exception as e:
        logger.error(f"Error configuring logger to write to file: {e}")

    return log_file


def log_section(title: str) -> None:
    """Write a banner block around ``title``."""
    logger.info("=" * 80)
    logger.info(title)
    logger.info("=" * 80)


__all__ = ["get_log_file_path", "init_logger", "log_section", "logger", "project_root"]
