"""
Metrics collection for the PIVOT optimizer.

Provides metrics for:
- Optimizer iterations and no-op iterations
- Oracle call counts, failures and latency
- Simulator episodes and their outcome

With metrics disabled the collector keeps in-memory counts that tests and
debugging sessions read back through ``get_stats()``.
"""

import time
from collections import Counter, defaultdict
from contextlib import contextmanager
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Dict, Iterator, List, Optional

import structlog

if TYPE_CHECKING:
    from src.models.config import ObservabilityConfig

logger = structlog.get_logger(__name__)

_collector: Optional["MetricsCollector"] = None

# name -> (kind, unit, description)
INSTRUMENTS: Dict[str, tuple] = {
    "pivot.iterations": ("counter", "1", "Completed optimizer iterations"),
    "pivot.noop_iterations": ("counter", "1", "Iterations without a usable oracle label"),
    "pivot.oracle_calls": ("counter", "1", "Oracle selection calls"),
    "pivot.oracle_failures": ("counter", "1", "Oracle calls that raised"),
    "pivot.oracle_latency": ("histogram", "ms", "Oracle call latency"),
    "pivot.episodes": ("counter", "1", "Simulator episodes run"),
}


@dataclass(frozen=True)
class MetricsConfig:
    """Metrics switch and export target."""

    enabled: bool = False
    exporter_type: str = "console"  # "console", "otlp", "none"
    service_name: str = "pivot"
    export_interval_s: int = 60

    @classmethod
    def from_observability(cls, obs: "ObservabilityConfig") -> "MetricsConfig":
        return cls(
            enabled=obs.metrics_enabled,
            exporter_type=obs.metrics_exporter,
            service_name=obs.service_name,
        )


def _metric_reader(config: MetricsConfig):
    kind = config.exporter_type.lower()
    if kind == "none":
        return None
    try:
        from opentelemetry.sdk.metrics.export import PeriodicExportingMetricReader

        if kind == "otlp":
            from opentelemetry.exporter.otlp.proto.grpc.metric_exporter import OTLPMetricExporter

            exporter = OTLPMetricExporter()
        else:
            from opentelemetry.sdk.metrics.export import ConsoleMetricExporter

            exporter = ConsoleMetricExporter()
    except ImportError as e:
        logger.warning("Metrics exporter unavailable", exporter=kind, error=str(e))
        return None
    return PeriodicExportingMetricReader(
        exporter, export_interval_millis=config.export_interval_s * 1000
    )


def setup_metrics(config: MetricsConfig) -> "MetricsCollector":
    """
    Install the process-wide collector.

    Falls back to in-memory counting when metrics are disabled or the
    OpenTelemetry SDK is missing.
    """
    global _collector

    meter = None
    if config.enabled:
        try:
            from opentelemetry.sdk.metrics import MeterProvider
            from opentelemetry.sdk.resources import SERVICE_NAME, Resource
        except ImportError as e:
            logger.warning("OpenTelemetry SDK not installed, metrics kept in memory", error=str(e))
        else:
            reader = _metric_reader(config)
            provider = MeterProvider(
                resource=Resource(attributes={SERVICE_NAME: config.service_name}),
                metric_readers=[reader] if reader is not None else [],
            )
            meter = provider.get_meter(config.service_name)
            logger.info("Metrics initialized", exporter=config.exporter_type)

    _collector = MetricsCollector(meter=meter)
    return _collector


def get_metrics() -> "MetricsCollector":
    """The process-wide collector; an in-memory one until setup_metrics runs."""
    global _collector
    if _collector is None:
        _collector = MetricsCollector()
    return _collector


@dataclass
class OracleTiming:
    """Wall-clock duration of one oracle call, filled in when the call ends."""

    started: float
    latency_ms: Optional[float] = None


class MetricsCollector:
    """Records optimizer, oracle and simulator metrics."""

    def __init__(self, meter: Any = None):
        self.enabled = meter is not None
        self._instruments: Dict[str, Any] = {}
        self._counts: Counter = Counter()
        self._samples: Dict[str, List[float]] = defaultdict(list)

        if meter is not None:
            for name, (kind, unit, description) in INSTRUMENTS.items():
                create = meter.create_histogram if kind == "histogram" else meter.create_counter
                self._instruments[name] = create(name, unit=unit, description=description)

    def _add(self, name: str, local_key: str, attributes: Optional[Dict[str, str]] = None) -> None:
        if self.enabled:
            self._instruments[name].add(1, attributes or {})
        else:
            self._counts[local_key] += 1

    def _observe(self, name: str, local_key: str, value: float, attributes: Dict[str, str]) -> None:
        if self.enabled and name in self._instruments:
            self._instruments[name].record(value, attributes)
        else:
            self._samples[local_key].append(value)

    def record_iteration(self, noop: bool = False) -> None:
        self._add("pivot.iterations", "iterations", {"noop": str(noop).lower()})
        if noop:
            self._add("pivot.noop_iterations", "noop_iterations")

    def record_oracle_call(self, oracle_kind: str, latency_ms: float, success: bool = True) -> None:
        attributes = {"oracle": oracle_kind, "success": str(success).lower()}
        self._add("pivot.oracle_calls", f"oracle_calls.{oracle_kind}", attributes)
        if not success:
            self._add("pivot.oracle_failures", f"oracle_failures.{oracle_kind}", attributes)
        self._observe("pivot.oracle_latency", "oracle_latency", latency_ms, attributes)

    def record_episode(self, success: bool, steps: int) -> None:
        outcome = "success" if success else "failure"
        self._add("pivot.episodes", f"episodes.{outcome}", {"success": str(success).lower()})
        if not self.enabled:
            self._samples["episode_steps"].append(float(steps))

    @contextmanager
    def oracle_call(self, oracle_kind: str) -> Iterator[OracleTiming]:
        """
        Time an oracle call and record it as failed if the block raises.

        Example:
            with metrics.oracle_call("remote"):
                response = await oracle.select(query)
        """
        timing = OracleTiming(started=time.perf_counter())
        success = False
        try:
            yield timing
            success = True
        finally:
            timing.latency_ms = (time.perf_counter() - timing.started) * 1000
            self.record_oracle_call(oracle_kind, timing.latency_ms, success=success)

    def get_stats(self) -> Dict[str, Any]:
        """In-memory counters plus min/max/avg of every local histogram."""
        stats: Dict[str, Any] = {"counters": dict(self._counts)}
        for name, values in self._samples.items():
            if values:
                stats[f"histogram.{name}"] = {
                    "count": len(values),
                    "min": min(values),
                    "max": max(values),
                    "avg": sum(values) / len(values),
                }
        return stats

    def reset(self) -> None:
        self._counts.clear()
        self._samples.clear()
