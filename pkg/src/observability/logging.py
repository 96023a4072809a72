"""
structlog configuration.

Logs always go to stderr so command output on stdout stays machine-readable.
"""

import logging
import sys
from typing import Optional

import structlog
from pydantic_settings import BaseSettings, SettingsConfigDict

_configured = False


class LoggingSettings(BaseSettings):
    """Logging overrides read from PIVOT_LOG_LEVEL / PIVOT_LOG_FORMAT."""

    model_config = SettingsConfigDict(env_prefix="PIVOT_LOG_", extra="ignore")

    level: Optional[str] = None
    format: Optional[str] = None


def setup_logging(level: str = "INFO", fmt: str = "console", force: bool = False) -> None:
    """
    Configure structlog once per process.

    Args:
        level: Minimum level name (DEBUG, INFO, WARNING, ERROR)
        fmt: "console" for human-readable output, "json" for one object per line
        force: Reconfigure even if already configured
    """
    global _configured
    if _configured and not force:
        return

    overrides = LoggingSettings()
    level = (overrides.level or level).upper()
    fmt = (overrides.format or fmt).lower()

    numeric_level = logging.getLevelName(level)
    if not isinstance(numeric_level, int):
        numeric_level = logging.INFO

    renderer = (
        structlog.processors.JSONRenderer()
        if fmt == "json"
        else structlog.dev.ConsoleRenderer(colors=False)
    )
    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(numeric_level),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )
    _configured = True
