"""Structured logging configuration and utilities.

Records go to stderr, either as single-line JSON objects or as plain text.
Both carry the name of the scenario being run, so interleaved output from a
sweep can be told apart, and numeric modules tag their records with the
module name used in error messages.
"""

import json
import logging
import sys
import time
from contextvars import ContextVar, Token
from datetime import datetime, timezone
from functools import wraps
from typing import Any, Callable, Dict, Optional

import numpy as np

from kernelzeros.config import get_settings

# Name of the scenario currently being run
scenario_var: ContextVar[Optional[str]] = ContextVar("scenario", default=None)

_NUMERICS_PREFIX = "kernelzeros.numerics."


def _json_default(value: Any) -> Any:
    """Encode numpy values found in ``extra_fields``."""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    return str(value)


class ScenarioFilter(logging.Filter):
    """Stamp records with the active scenario and the numeric module."""

    def filter(self, record: logging.LogRecord) -> bool:
        record.scenario = scenario_var.get() or "-"
        name = record.name
        record.numeric_module = name[len(_NUMERICS_PREFIX) :] if name.startswith(_NUMERICS_PREFIX) else None
        return True


class StructuredFormatter(logging.Formatter):
    """One JSON object per record.

    ``extra={"extra_fields": {...}}`` entries are merged into the top level;
    numpy scalars and arrays are converted to plain JSON values.
    """

    def format(self, record: logging.LogRecord) -> str:
        log_data: Dict[str, Any] = {
            "timestamp": datetime.fromtimestamp(record.created, timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        scenario = getattr(record, "scenario", "-")
        if scenario != "-":
            log_data["scenario"] = scenario
        module = getattr(record, "numeric_module", None)
        if module:
            log_data["numeric_module"] = module
        if record.exc_info:
            log_data["exception"] = self.formatException(record.exc_info)
        log_data.update(getattr(record, "extra_fields", {}))
        return json.dumps(log_data, default=_json_default)


class StandardFormatter(logging.Formatter):
    """Human-readable single-line records with the scenario in brackets."""

    def __init__(self) -> None:
        super().__init__(
            fmt="%(asctime)s %(levelname)-7s [%(scenario)s] %(name)s: %(message)s",
            datefmt="%H:%M:%S",
        )


def setup_logger(
    name: str,
    *,
    structured: Optional[bool] = None,
    level: Optional[str] = None,
) -> logging.Logger:
    """Set up and configure a logger instance.

    Args:
        name: Name of the logger (typically __name__)
        structured: If True, use structured JSON logging (defaults to config setting)
        level: Optional log level override (defaults to config setting)

    Returns:
        Configured logger instance

    Example:
        ```python
        from kernelzeros.utils.logger import setup_logger

        logger = setup_logger(__name__)
        logger.info("Moments computed", extra={"extra_fields": {"grid": 2048}})
        ```
    """
    settings = get_settings()
    logger = logging.getLogger(name)

    log_level = getattr(logging, (level or settings.output.log_level).upper())
    logger.setLevel(log_level)

    if structured is None:
        structured = settings.output.structured_logs

    if not logger.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.addFilter(ScenarioFilter())
        handler.setFormatter(StructuredFormatter() if structured else StandardFormatter())
        logger.addHandler(handler)
        logger.propagate = False

    return logger


def log_performance(
    logger: logging.Logger,
    operation: str,
    threshold_seconds: float = 1.0,
) -> Callable:
    """Decorator timing a numeric step.

    Every call is logged at DEBUG with its duration; calls slower than
    ``threshold_seconds`` are repeated at WARNING.

    Example:
        ```python
        @log_performance(logger, "gp_moments", threshold_seconds=5.0)
        def gp_moments(spec, design, f, grid=None):
            ...
        ```
    """

    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            start = time.perf_counter()
            result = func(*args, **kwargs)
            duration = time.perf_counter() - start

            fields = {"operation": operation, "duration_seconds": round(duration, 3)}
            if duration >= threshold_seconds:
                logger.warning(
                    f"{operation} took {duration:.1f}s",
                    extra={"extra_fields": {**fields, "threshold_seconds": threshold_seconds}},
                )
            else:
                logger.debug(f"{operation} finished", extra={"extra_fields": fields})
            return result

        return wrapper

    return decorator


class LogContext:
    """Set the scenario name for the records emitted inside the block.

    Example:
        ```python
        with LogContext(scenario="rice-check"):
            logger.info("Running")  # records carry scenario=rice-check
        ```
    """

    def __init__(self, scenario: Optional[str] = None):
        self.scenario = scenario
        self._token: Optional[Token[Optional[str]]] = None

    def __enter__(self) -> "LogContext":
        if self.scenario:
            self._token = scenario_var.set(self.scenario)
        return self

    def __exit__(self, *args: Any) -> None:
        if self._token is not None:
            scenario_var.reset(self._token)
            self._token = None
