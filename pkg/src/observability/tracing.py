"""
OpenTelemetry tracing for the PIVOT optimizer.

Spans cover:
- Whole optimizer runs and single iterations
- Oracle selection calls (latency, labels requested, oracle kind)
- Parallel instance fan-out
- Simulator rollouts

Without the SDK, or with tracing disabled, every span comes from the API's
no-op tracer, so instrumented code never branches on whether tracing is on.
"""

import functools
import inspect
from contextlib import contextmanager
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Callable, Dict, Iterator, Optional, TypeVar

import structlog
from opentelemetry import trace

if TYPE_CHECKING:
    from src.models.config import ObservabilityConfig

logger = structlog.get_logger(__name__)

F = TypeVar("F", bound=Callable[..., Any])

_NOOP_TRACER = trace.NoOpTracer()
_tracer: Optional[trace.Tracer] = None

# Argument names never copied onto spans
_REDACTED_NAMES = ("key", "token", "secret", "password", "credential", "auth")
_SCALARS = (bool, int, float, str)


@dataclass(frozen=True)
class TracingConfig:
    """Where spans go and how many of them are kept."""

    enabled: bool = False
    service_name: str = "pivot"
    exporter_type: str = "console"  # "console", "otlp", "none"
    otlp_endpoint: str = "http://localhost:4317"
    sample_rate: float = 1.0

    @classmethod
    def from_observability(cls, obs: "ObservabilityConfig") -> "TracingConfig":
        return cls(
            enabled=obs.tracing_enabled,
            service_name=obs.service_name,
            exporter_type=obs.tracing_exporter,
            otlp_endpoint=obs.tracing_endpoint,
            sample_rate=obs.tracing_sample_rate,
        )


def _span_exporter(config: TracingConfig):
    kind = config.exporter_type.lower()
    if kind == "none":
        return None
    try:
        if kind == "otlp":
            from opentelemetry.exporter.otlp.proto.grpc.trace_exporter import OTLPSpanExporter

            return OTLPSpanExporter(endpoint=config.otlp_endpoint)
        from opentelemetry.sdk.trace.export import ConsoleSpanExporter

        return ConsoleSpanExporter()
    except ImportError as e:
        logger.warning("Span exporter unavailable", exporter=kind, error=str(e))
        return None


def setup_tracing(config: TracingConfig) -> None:
    """
    Install a tracer for the run.

    Leaves the no-op tracer in place when tracing is disabled or the
    OpenTelemetry SDK cannot be imported.
    """
    global _tracer

    if not config.enabled:
        _tracer = None
        logger.debug("Tracing disabled")
        return

    try:
        from opentelemetry.sdk.resources import SERVICE_NAME, Resource
        from opentelemetry.sdk.trace import TracerProvider
        from opentelemetry.sdk.trace.export import BatchSpanProcessor
        from opentelemetry.sdk.trace.sampling import TraceIdRatioBased
    except ImportError as e:
        _tracer = None
        logger.warning("OpenTelemetry SDK not installed, tracing disabled", error=str(e))
        return

    provider = TracerProvider(
        resource=Resource(attributes={SERVICE_NAME: config.service_name}),
        sampler=TraceIdRatioBased(config.sample_rate),
    )
    exporter = _span_exporter(config)
    if exporter is not None:
        provider.add_span_processor(BatchSpanProcessor(exporter))

    _tracer = provider.get_tracer(config.service_name)
    logger.info(
        "Tracing initialized",
        service_name=config.service_name,
        exporter=config.exporter_type,
        sample_rate=config.sample_rate,
    )


def get_tracer() -> trace.Tracer:
    """The run's tracer, or the no-op tracer when tracing is off."""
    return _tracer if _tracer is not None else _NOOP_TRACER


def reset_tracing() -> None:
    global _tracer
    _tracer = None


def _argument_attributes(func: Callable[..., Any], args: tuple, kwargs: dict) -> Dict[str, Any]:
    """Scalar call arguments as span attributes; images and configs are skipped."""
    try:
        bound = inspect.signature(func).bind_partial(*args, **kwargs)
    except TypeError:
        return {}
    attributes: Dict[str, Any] = {}
    for name, value in bound.arguments.items():
        if any(marker in name.lower() for marker in _REDACTED_NAMES):
            attributes[f"arg.{name}"] = "[REDACTED]"
        elif isinstance(value, _SCALARS):
            attributes[f"arg.{name}"] = value if not isinstance(value, str) else value[:100]
    return attributes


def traced(span_name: Optional[str] = None, attributes: Optional[Dict[str, Any]] = None):
    """
    Run a function, sync or async, inside a span.

    The span records ``success`` and any exception; scalar arguments become
    ``arg.<name>`` attributes.

    Example:
        @traced("parallel_pivot", {"component": "optimize"})
        async def parallel_pivot(problem, oracle, config, rng):
            ...
    """

    def decorator(func: F) -> F:
        name = span_name or func.__name__

        @contextmanager
        def span_for(args: tuple, kwargs: dict) -> Iterator[Any]:
            with get_tracer().start_as_current_span(name, record_exception=False) as span:
                span.set_attributes(
                    {**(attributes or {}), **_argument_attributes(func, args, kwargs)}
                )
                try:
                    yield span
                except Exception as e:
                    span.set_attribute("success", False)
                    span.record_exception(e)
                    raise
                span.set_attribute("success", True)

        if inspect.iscoroutinefunction(func):

            @functools.wraps(func)
            async def async_wrapper(*args: Any, **kwargs: Any) -> Any:
                with span_for(args, kwargs):
                    return await func(*args, **kwargs)

            return async_wrapper  # type: ignore[return-value]

        @functools.wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            with span_for(args, kwargs):
                return func(*args, **kwargs)

        return wrapper  # type: ignore[return-value]

    return decorator


@contextmanager
def _span(name: str, attributes: Dict[str, Any]) -> Iterator[Any]:
    with get_tracer().start_as_current_span(name) as span:
        span.set_attributes(attributes)
        yield span


def trace_pivot_step(iteration: int, samples: int, sigma: float):
    """
    Span for one optimizer iteration.

    Example:
        with trace_pivot_step(0, 10, 0.5) as span:
            ...
            span.set_attribute("pivot.noop", False)
    """
    return _span(
        "pivot_step",
        {"pivot.iteration": iteration, "pivot.samples": samples, "pivot.sigma": float(sigma)},
    )


def trace_oracle_call(oracle_kind: str, k: int, labels: int, **extra_attributes: Any):
    return _span(
        "oracle_select",
        {"oracle.kind": oracle_kind, "oracle.k": k, "oracle.labels": labels, **extra_attributes},
    )


def trace_rollout(episode: int, budget: int):
    return _span("rollout", {"sim.episode": episode, "sim.budget": budget})
