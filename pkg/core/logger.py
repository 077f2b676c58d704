#!/usr/bin/env python3
"""
ReliefE Logging System
Rotating file logs, console output and per-run warning capture for manifests
"""

import logging
import sys
import time
from contextlib import contextmanager
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Dict, Iterator, List, Optional

import config

ROOT_LOGGER_NAME = "reliefe"

# Library modules log through their package names; route them to one tree.
_PACKAGE_LOGGERS = ("core", "modules", "plugins", "__main__", "main")


class ManifestLogHandler(logging.Handler):
    """Buffer warnings so each run manifest can list what was flagged."""

    def __init__(self, level=logging.WARNING):
        super().__init__(level)
        self.records: List[Dict[str, str]] = []

    def emit(self, record):
        """Keep a compact copy of the record"""
        try:
            self.records.append(
                {
                    "level": record.levelname,
                    "logger": record.name,
                    "message": record.getMessage(),
                }
            )
        except Exception:
            self.handleError(record)

    def drain(self) -> List[Dict[str, str]]:
        """Return buffered records and reset the buffer"""
        records, self.records = self.records, []
        return records


class ReliefLogger:
    """ReliefE logger with rotating files, console and manifest capture"""

    def __init__(self, name: str = ROOT_LOGGER_NAME):
        self.name = name
        self.log_dir: Optional[Path] = None

        self.logger = logging.getLogger(name)
        self.logger.setLevel(logging.DEBUG)
        self.logger.propagate = False

        self.manifest_handler = ManifestLogHandler()
        self._configured = False

    def setup(self, log_dir: Optional[str] = None, console_level: Optional[str] = None,
              file_logging: bool = True):
        """Attach handlers once; later calls only adjust the console level"""
        level = getattr(logging, (console_level or config.LOG_LEVEL).upper(), logging.INFO)

        if self._configured:
            for handler in self.logger.handlers:
                if isinstance(handler, logging.StreamHandler) and not isinstance(
                    handler, RotatingFileHandler
                ):
                    handler.setLevel(level)
            return

        self.logger.handlers.clear()
        if file_logging:
            self.log_dir = Path(log_dir or config.LOG_DIR)
            self.log_dir.mkdir(parents=True, exist_ok=True)
            self._setup_file_handlers()
        self._setup_console_handler(level)
        self.logger.addHandler(self.manifest_handler)

        for package in _PACKAGE_LOGGERS:
            package_logger = logging.getLogger(package)
            package_logger.setLevel(logging.DEBUG)
            package_logger.propagate = False
            package_logger.handlers = list(self.logger.handlers)

        self._configured = True

    def _setup_file_handlers(self):
        """Setup rotating file handlers"""

        # Main log (all levels)
        main_handler = RotatingFileHandler(
            self.log_dir / 'reliefe.log',
            maxBytes=10*1024*1024,  # 10MB
            backupCount=5,
            encoding='utf-8'
        )
        main_handler.setLevel(logging.DEBUG)
        main_formatter = logging.Formatter(
            '%(asctime)s | %(levelname)-8s | %(name)s.%(funcName)s:%(lineno)d | %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )
        main_handler.setFormatter(main_formatter)
        self.logger.addHandler(main_handler)

        # Error log (errors only)
        error_handler = RotatingFileHandler(
            self.log_dir / 'reliefe_errors.log',
            maxBytes=5*1024*1024,  # 5MB
            backupCount=3,
            encoding='utf-8'
        )
        error_handler.setLevel(logging.ERROR)
        error_formatter = logging.Formatter(
            '%(asctime)s | %(levelname)s | %(name)s.%(funcName)s:%(lineno)d\n'
            'Message: %(message)s\n'
            '%(pathname)s\n'
            + '-' * 80,
            datefmt='%Y-%m-%d %H:%M:%S'
        )
        error_handler.setFormatter(error_formatter)
        self.logger.addHandler(error_handler)

    def _setup_console_handler(self, level):
        """Setup console output (stderr, stdout carries command results)"""
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(level)
        console_formatter = logging.Formatter(
            '%(levelname)s | %(name)s | %(message)s'
        )
        console_handler.setFormatter(console_formatter)
        self.logger.addHandler(console_handler)

    def get_logger(self) -> logging.Logger:
        """Get logger instance"""
        return self.logger

    def drain_warnings(self) -> List[Dict[str, str]]:
        """Warnings captured since the last drain"""
        return self.manifest_handler.drain()


class StageTimer:
    """Accumulate wall-clock seconds per pipeline stage."""

    def __init__(self):
        self.timings: Dict[str, float] = {}
        self._started = time.perf_counter()

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            elapsed = time.perf_counter() - start
            self.timings[name] = self.timings.get(name, 0.0) + elapsed

    @property
    def total(self) -> float:
        return time.perf_counter() - self._started


# Global logger instance
relief_logger = ReliefLogger(ROOT_LOGGER_NAME)


def setup_logging(log_dir: Optional[str] = None, verbose: bool = False,
                  file_logging: bool = True) -> ReliefLogger:
    """Setup complete logging system"""
    relief_logger.setup(
        log_dir=log_dir,
        console_level="DEBUG" if verbose else None,
        file_logging=file_logging,
    )
    relief_logger.get_logger().debug("Logging system initialized")
    return relief_logger
