"""
Observability for the PIVOT optimizer.

Provides OpenTelemetry integration for tracing and metrics, plus the
structlog setup shared by the library and the CLI.
"""

from src.observability.logging import LoggingSettings, setup_logging
from src.observability.metrics import (
    MetricsCollector,
    MetricsConfig,
    get_metrics,
    setup_metrics,
)
from src.observability.tracing import (
    TracingConfig,
    get_tracer,
    reset_tracing,
    setup_tracing,
    trace_oracle_call,
    trace_pivot_step,
    trace_rollout,
    traced,
)

__all__ = [
    "LoggingSettings",
    "setup_logging",
    "setup_tracing",
    "get_tracer",
    "reset_tracing",
    "TracingConfig",
    "traced",
    "trace_pivot_step",
    "trace_oracle_call",
    "trace_rollout",
    "setup_metrics",
    "MetricsCollector",
    "MetricsConfig",
    "get_metrics",
]
