"""Structured logging for poe-sim with rich integration.

This module provides a configurable logging infrastructure that supports:
- Console output with rich formatting (stderr)
- File output with one JSON object per line
- Bound context fields (replica id, client id) carried on every call

Simulations create thousands of state machines per campaign, so loggers are
cached per name and `bind` only wraps the cached instance.
"""

from __future__ import annotations

import json
import logging
import os
from pathlib import Path
from typing import Any

from rich.console import Console
from rich.logging import RichHandler

LEVEL_ENV = "POE_LOG_LEVEL"
DEFAULT_LEVEL = "WARNING"

_RESERVED = frozenset(logging.LogRecord("", 0, "", 0, "", (), None).__dict__) | {
    "message",
    "asctime",
}

_loggers: dict[str, StructuredLogger] = {}


def _default_level() -> str:
    return os.environ.get(LEVEL_ENV, DEFAULT_LEVEL)


def _safe_extra(fields: dict[str, Any]) -> dict[str, Any]:
    return {(f"{k}_" if k in _RESERVED else k): v for k, v in fields.items()}


class StructuredLogger:
    """Structured logger with rich console integration."""

    def __init__(
        self,
        name: str,
        level: str | None = None,
        console_output: bool = True,
        file_output: Path | None = None,
        json_format: bool = False,
    ):
        """Initialize structured logger.

        Args:
            name: Logger name (typically module name)
            level: Logging level; defaults to $POE_LOG_LEVEL or WARNING
            console_output: Enable rich console output
            file_output: Optional file path for logging
            json_format: Use JSON format for file output
        """
        self.name = name
        self.level = getattr(logging, (level or _default_level()).upper())
        self.console_output = console_output
        self.file_output = file_output
        self.json_format = json_format

        self.logger = logging.getLogger(name)
        self.logger.setLevel(self.level)
        self.logger.propagate = False
        self.logger.handlers.clear()

        if console_output:
            console_handler = RichHandler(
                console=Console(stderr=True),
                show_time=True,
                show_path=False,
                rich_tracebacks=True,
            )
            console_handler.setLevel(self.level)
            self.logger.addHandler(console_handler)

        if file_output:
            file_handler = logging.FileHandler(file_output)
            file_handler.setLevel(logging.DEBUG)
            if json_format:
                file_handler.setFormatter(JsonFormatter())
            else:
                file_handler.setFormatter(
                    logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
                )
            self.logger.addHandler(file_handler)

    def isEnabledFor(self, level: int) -> bool:  # noqa: N802 - mirrors logging.Logger
        return self.logger.isEnabledFor(level)

    def bind(self, **fields: Any) -> BoundLogger:
        """Child logger whose calls always carry `fields`."""
        return BoundLogger(self, fields)

    def log(self, level: int, message: str, **kwargs: Any) -> None:
        if self.logger.isEnabledFor(level):
            self.logger.log(level, message, extra=_safe_extra(kwargs))

    def debug(self, message: str, **kwargs: Any) -> None:
        self.log(logging.DEBUG, message, **kwargs)

    def info(self, message: str, **kwargs: Any) -> None:
        self.log(logging.INFO, message, **kwargs)

    def warning(self, message: str, **kwargs: Any) -> None:
        self.log(logging.WARNING, message, **kwargs)

    def error(self, message: str, **kwargs: Any) -> None:
        self.log(logging.ERROR, message, **kwargs)

    def critical(self, message: str, **kwargs: Any) -> None:
        self.log(logging.CRITICAL, message, **kwargs)


class BoundLogger:
    """A StructuredLogger view with fixed context fields."""

    __slots__ = ("_parent", "fields")

    def __init__(self, parent: StructuredLogger, fields: dict[str, Any]) -> None:
        self._parent = parent
        self.fields = dict(fields)

    def bind(self, **fields: Any) -> BoundLogger:
        return BoundLogger(self._parent, {**self.fields, **fields})

    def log(self, level: int, message: str, **kwargs: Any) -> None:
        if self._parent.isEnabledFor(level):
            self._parent.log(level, message, **{**self.fields, **kwargs})

    def debug(self, message: str, **kwargs: Any) -> None:
        self.log(logging.DEBUG, message, **kwargs)

    def info(self, message: str, **kwargs: Any) -> None:
        self.log(logging.INFO, message, **kwargs)

    def warning(self, message: str, **kwargs: Any) -> None:
        self.log(logging.WARNING, message, **kwargs)

    def error(self, message: str, **kwargs: Any) -> None:
        self.log(logging.ERROR, message, **kwargs)


class JsonFormatter(logging.Formatter):
    """JSON formatter for structured file logging."""

    def format(self, record: logging.LogRecord) -> str:
        log_data = {
            "timestamp": self.formatTime(record),
            "name": record.name,
            "level": record.levelname,
            "message": record.getMessage(),
            "module": record.module,
            "funcName": record.funcName,
            "lineno": record.lineno,
        }
        for key, value in record.__dict__.items():
            if key not in _RESERVED and key not in log_data and not key.startswith("_"):
                log_data[key] = value
        return json.dumps(log_data, default=str)


def get_logger(
    name: str,
    level: str | None = None,
    console_output: bool = True,
    file_output: str | Path | None = None,
    json_format: bool = False,
) -> StructuredLogger:
    """Get or create a structured logger instance.

    A logger requested again with only a name is returned from cache;
    passing any option rebuilds it.

    Args:
        name: Logger name (typically __name__)
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        console_output: Enable rich console output
        file_output: Optional file path for logging
        json_format: Use JSON format for file output

    Returns:
        Configured StructuredLogger instance
    """
    customised = level is not None or file_output is not None or json_format or not console_output
    cached = _loggers.get(name)
    if cached is not None and not customised:
        return cached
    if isinstance(file_output, str):
        file_output = Path(file_output)
    logger = StructuredLogger(
        name=name,
        level=level,
        console_output=console_output,
        file_output=file_output,
        json_format=json_format,
    )
    _loggers[name] = logger
    return logger


def configure_root(level: str, log_file: str | Path | None = None) -> None:
    """Apply a CLI-selected level (and optional JSON file) to every `core` logger."""
    os.environ[LEVEL_ENV] = level.upper()
    for name in list(_loggers):
        get_logger(name, level=level, file_output=log_file, json_format=log_file is not None)
    get_logger("core", level=level, file_output=log_file, json_format=log_file is not None)
