"""Structured logging for borderflux runs.

Every command binds its name and seed into the structlog context, so library
log lines from one run can be told apart without threading either value
through the call stack.
"""

import logging
import sys
from typing import Any, Optional

import structlog

from borderflux.exceptions import ValidationError

LOG_FORMATS = ("console", "json")


def _renderer(log_format: str):
    if log_format == "json":
        return structlog.processors.JSONRenderer(sort_keys=True)
    return structlog.dev.ConsoleRenderer(colors=False)


def setup_logging(log_level: str = "WARNING", log_format: str = "console") -> None:
    """Send structured log lines to stderr; artifacts own stdout and the out dir.

    Raises:
        ValidationError: unknown level or format name.
    """
    level = logging.getLevelName(log_level.upper())
    if not isinstance(level, int):
        raise ValidationError(f"unknown log level '{log_level}'")
    if log_format not in LOG_FORMATS:
        raise ValidationError(
            f"unknown log format '{log_format}'. Expected one of {LOG_FORMATS}"
        )
    logging.basicConfig(format="%(message)s", stream=sys.stderr, level=level)

    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.StackInfoRenderer(),
            structlog.dev.set_exc_info,
            structlog.processors.TimeStamper(fmt="ISO"),
            _renderer(log_format),
        ],
        wrapper_class=structlog.make_filtering_bound_logger(level),
        logger_factory=structlog.WriteLoggerFactory(file=sys.stderr),
        context_class=dict,
        cache_logger_on_first_use=False,
    )


def bind_run_context(command: str, seed: Optional[int] = None, **fields: Any) -> None:
    """Replace the run context with ``command``, ``seed`` and extra fields."""
    structlog.contextvars.clear_contextvars()
    context = {"command": command, **fields}
    if seed is not None:
        context["seed"] = seed
    structlog.contextvars.bind_contextvars(**context)


def run_context() -> dict[str, Any]:
    return structlog.contextvars.get_contextvars()


def get_logger(name: str) -> structlog.BoundLogger:
    return structlog.get_logger(name)
