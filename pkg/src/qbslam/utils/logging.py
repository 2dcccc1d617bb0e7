"""
Logging and console output.

Library modules bind ``logger = get_configured_logger('Name')`` (a ``qbslam.Name`` logger,
silent below WARNING unless verbose logging is on). User-facing progress and summaries go
through :data:`log_manager`, a rich console on stderr that ``--quiet`` silences.
"""

from __future__ import annotations

import datetime
import logging
from collections.abc import Iterable, Iterator
from logging import NullHandler
from pathlib import Path
from typing import NamedTuple, TypeVar

from rich.console import Console
from rich.progress import (
    BarColumn,
    MofNCompleteColumn,
    Progress,
    TaskID,
    TextColumn,
    TimeElapsedColumn,
    TimeRemainingColumn,
)

T = TypeVar('T')

__all__ = [
    'configure_logging',
    'enable_verbose_logging',
    'get_configured_logger',
    'log_and_display',
    'log_manager',
    'trackerator',
]

ROOT = 'qbslam'
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
QUIET_LEVELS = frozenset({'warning', 'error', 'critical'})

_CONFIGURED_LOGGERS: list[str] = []
VERBOSE_LOGGING: bool = False


def configure_logging(log_dir: str | Path = 'logs') -> Path:
    """Route all qbslam loggers to a timestamped file under ``log_dir`` and return its path."""
    logs_dir = Path(log_dir)
    logs_dir.mkdir(parents=True, exist_ok=True)
    stamp = datetime.datetime.now().strftime('%Y%m%d_%H%M%S')
    log_filepath = logs_dir / f'{stamp}_{ROOT}.log'

    logging.basicConfig(level=logging.INFO, format=LOG_FORMAT, filename=log_filepath, filemode='a', encoding='utf-8')

    # Pillow's plugin discovery is chatty at INFO
    pil_logger = logging.getLogger('PIL')
    pil_logger.propagate = False
    pil_logger.handlers.clear()
    pil_logger.addHandler(NullHandler())

    return log_filepath


def _level() -> int:
    return logging.INFO if VERBOSE_LOGGING else logging.WARNING


def get_configured_logger(name: str) -> logging.Logger:
    """Build or return the ``qbslam.<name>`` logger."""
    logger = logging.getLogger(f'{ROOT}.{name}')
    if name not in _CONFIGURED_LOGGERS:
        _CONFIGURED_LOGGERS.append(name)
    # Re-applied on every call so a late enable_verbose_logging() still wins
    logger.setLevel(_level())
    if not logger.handlers:
        logger.addHandler(NullHandler())
    return logger


def enable_verbose_logging() -> None:
    """Raise every qbslam logger created so far (and all later ones) to INFO."""
    global VERBOSE_LOGGING
    VERBOSE_LOGGING = True
    for name in _CONFIGURED_LOGGERS:
        logging.getLogger(f'{ROOT}.{name}').setLevel(logging.INFO)


# ── Console ──────────────────────────────────────────────────────────────────


class _Bar(NamedTuple):
    progress: Progress
    task: TaskID


class ConsoleLogger:
    """
    One frame-counting progress bar at a time, plus messages.

    A non-sticky message replaces the bar's description; a sticky one is printed
    above the bar (or on its own line when no bar is running).
    """

    def __init__(self) -> None:
        self.console = Console(stderr=True)
        self.logger = logging.getLogger(ROOT)
        self.quiet = False
        self._bar: _Bar | None = None

    def start_progress(self, total: int, description: str = 'Working…') -> None:
        self.finalize_progress()
        if self.quiet:
            return
        progress = Progress(
            TextColumn('[progress.description]{task.description}'),
            BarColumn(),
            MofNCompleteColumn(),
            TimeElapsedColumn(),
            TimeRemainingColumn(),
            console=self.console,
        )
        progress.start()
        self._bar = _Bar(progress, progress.add_task(description, total=total))

    def update_progress(self, advance: int = 1, description: str | None = None) -> None:
        if self._bar is None:
            return
        self._bar.progress.update(self._bar.task, advance=advance, description=description)

    def finalize_progress(self, final_description: str | None = None) -> None:
        """Stop the running bar, if any, after a last description change."""
        if self._bar is None:
            return
        bar, self._bar = self._bar, None
        if final_description is not None:
            bar.progress.update(bar.task, description=final_description)
        bar.progress.stop()

    def log(self, message: str, *, sticky: bool = False, level: str = 'info', log: bool = True) -> None:
        level = level.lower()
        if log:
            getattr(self.logger, level)(message)
        if self.quiet and level not in QUIET_LEVELS:
            return
        if self._bar is None:
            self.console.print(message)
        elif sticky:
            self._bar.progress.console.print(message)
        else:
            self._bar.progress.update(self._bar.task, description=message)


log_manager = ConsoleLogger()


def log_and_display(message: str, level: str = 'info', *, sticky: bool = False, log: bool = True) -> None:
    """Log to the ``qbslam`` logger and show the message on the console."""
    log_manager.log(message, sticky=sticky, level=level, log=log)


def trackerator(items: Iterable[T], total: int, description: str = 'Working...', final_message: str | None = None) -> Iterator[T]:
    """Yield ``items`` while advancing the progress bar by one per item."""
    log_manager.start_progress(total, description)
    for item in items:
        yield item
        log_manager.update_progress()
    log_manager.finalize_progress(final_message)
