"""
Tests for the observability module.

Tests tracing, metrics and logging setup.
"""

import pytest


class TestTracingConfig:
    """Tests for TracingConfig."""

    def test_default_config(self):
        """Tracing is off and exports to the console by default."""
        from src.observability.tracing import TracingConfig

        config = TracingConfig()
        assert config.enabled is False
        assert config.service_name == "pivot"
        assert config.exporter_type == "console"
        assert config.sample_rate == 1.0

    def test_from_observability(self):
        """The [observability] section maps onto the tracing settings."""
        from src.models.config import ObservabilityConfig
        from src.observability.tracing import TracingConfig

        config = TracingConfig.from_observability(
            ObservabilityConfig(
                tracing_enabled=True,
                tracing_exporter="otlp",
                tracing_endpoint="http://collector:4317",
                tracing_sample_rate=0.5,
                service_name="pivot-eval",
            )
        )
        assert config.enabled is True
        assert config.exporter_type == "otlp"
        assert config.otlp_endpoint == "http://collector:4317"
        assert config.sample_rate == 0.5
        assert config.service_name == "pivot-eval"


class TestTracer:
    """Tests for tracer selection."""

    def test_noop_tracer_when_disabled(self):
        """Spans from the disabled tracer accept attributes and record nothing."""
        from src.observability.tracing import TracingConfig, get_tracer, setup_tracing

        setup_tracing(TracingConfig(enabled=False))

        with get_tracer().start_as_current_span("noop") as span:
            span.set_attribute("pivot.sigma", 0.5)
            assert not span.is_recording()

    def test_enabled_tracer_records(self):
        """An enabled tracer hands out recording spans."""
        from src.observability.tracing import (
            TracingConfig,
            get_tracer,
            reset_tracing,
            setup_tracing,
        )

        setup_tracing(TracingConfig(enabled=True, exporter_type="none"))
        try:
            with get_tracer().start_as_current_span("pivot_step") as span:
                assert span.is_recording()
        finally:
            reset_tracing()


class TestTraced:
    """Tests for the traced decorator."""

    def test_sync_function(self):
        """Sync functions keep their return value and name."""
        from src.observability.tracing import traced

        @traced("fit")
        def add(x, y):
            return x + y

        assert add(1, 2) == 3
        assert add.__name__ == "add"

    async def test_async_function(self):
        """Coroutines stay awaitable."""
        import inspect

        from src.observability.tracing import traced

        @traced()
        async def multiply(x, y):
            return x * y

        assert inspect.iscoroutinefunction(multiply)
        assert await multiply(3, 4) == 12

    async def test_errors_propagate(self):
        """Exceptions pass through the span unchanged."""
        from src.observability.tracing import traced

        @traced("failing")
        async def failing():
            raise ValueError("boom")

        with pytest.raises(ValueError, match="boom"):
            await failing()

    def test_argument_attributes(self):
        """Scalar arguments are copied, secrets are redacted, arrays are skipped."""
        import numpy as np

        from src.observability.tracing import _argument_attributes

        def run(samples, api_key, image, instruction="go to the door"):
            pass

        attributes = _argument_attributes(run, (10, "sk-123", np.zeros((2, 2))), {})
        assert attributes == {
            "arg.samples": 10,
            "arg.api_key": "[REDACTED]",
        }


class TestTracingContextManagers:
    """Tests for the span helpers."""

    def test_trace_pivot_step(self):
        """Optimizer iteration span."""
        from src.observability.tracing import trace_pivot_step

        with trace_pivot_step(0, 10, 42.5) as span:
            span.set_attribute("pivot.noop", False)

    def test_trace_oracle_call(self):
        """Oracle call span with extra attributes."""
        from src.observability.tracing import trace_oracle_call

        with trace_oracle_call("synthetic", k=3, labels=10, model="none"):
            pass

    def test_trace_rollout(self):
        """Simulator episode span."""
        from src.observability.tracing import trace_rollout

        with trace_rollout(episode=2, budget=10):
            pass


class TestMetricsCollector:
    """Tests for MetricsCollector."""

    def test_record_iteration(self):
        """Iterations and no-op iterations are counted separately."""
        from src.observability.metrics import MetricsCollector

        collector = MetricsCollector()
        collector.record_iteration()
        collector.record_iteration(noop=True)

        counters = collector.get_stats()["counters"]
        assert counters["iterations"] == 2
        assert counters["noop_iterations"] == 1

    def test_record_oracle_call(self):
        """Oracle calls are counted per kind with a latency histogram."""
        from src.observability.metrics import MetricsCollector

        collector = MetricsCollector()
        collector.record_oracle_call("remote", 120.0)
        collector.record_oracle_call("remote", 80.0, success=False)

        stats = collector.get_stats()
        assert stats["counters"]["oracle_calls.remote"] == 2
        assert stats["counters"]["oracle_failures.remote"] == 1
        assert stats["histogram.oracle_latency"]["count"] == 2
        assert stats["histogram.oracle_latency"]["avg"] == pytest.approx(100.0)

    def test_record_episode(self):
        """Episodes are split by outcome."""
        from src.observability.metrics import MetricsCollector

        collector = MetricsCollector()
        collector.record_episode(success=True, steps=4)
        collector.record_episode(success=False, steps=10)

        stats = collector.get_stats()
        assert stats["counters"]["episodes.success"] == 1
        assert stats["counters"]["episodes.failure"] == 1
        assert stats["histogram.episode_steps"]["max"] == 10

    def test_oracle_call_records_latency(self):
        """The oracle_call block fills in latency and counts a success."""
        from src.observability.metrics import MetricsCollector

        collector = MetricsCollector()
        with collector.oracle_call("replay") as timing:
            pass

        assert timing.latency_ms is not None
        assert timing.latency_ms >= 0.0
        assert collector.get_stats()["counters"] == {"oracle_calls.replay": 1}

    def test_oracle_call_counts_failure(self):
        """A raising block is recorded as a failed call and re-raised."""
        from src.errors import OracleTransportError
        from src.observability.metrics import MetricsCollector

        collector = MetricsCollector()
        with pytest.raises(OracleTransportError):
            with collector.oracle_call("remote"):
                raise OracleTransportError("503", status_code=503)

        counters = collector.get_stats()["counters"]
        assert counters["oracle_calls.remote"] == 1
        assert counters["oracle_failures.remote"] == 1

    def test_reset(self):
        """Reset clears counters and histograms."""
        from src.observability.metrics import MetricsCollector

        collector = MetricsCollector()
        collector.record_oracle_call("synthetic", 1.0)
        collector.reset()
        assert collector.get_stats() == {"counters": {}}


class TestMetricsModule:
    """Tests for metrics module functions."""

    def test_setup_and_get_metrics(self):
        """Test setup_metrics and get_metrics functions."""
        from src.observability.metrics import MetricsConfig, get_metrics, setup_metrics

        collector = setup_metrics(MetricsConfig(enabled=False))
        assert get_metrics() is collector
        assert collector.enabled is False

    def test_enabled_metrics_skip_local_counts(self):
        """With a meter installed, counts go to the instruments instead of memory."""
        from src.observability.metrics import MetricsConfig, setup_metrics

        try:
            collector = setup_metrics(MetricsConfig(enabled=True, exporter_type="none"))
            assert collector.enabled is True
            collector.record_iteration(noop=True)
            assert collector.get_stats() == {"counters": {}}
        finally:
            setup_metrics(MetricsConfig(enabled=False))

    def test_from_observability(self):
        """The [observability] section maps onto the metrics settings."""
        from src.models.config import ObservabilityConfig
        from src.observability.metrics import MetricsConfig

        config = MetricsConfig.from_observability(
            ObservabilityConfig(metrics_enabled=True, metrics_exporter="otlp")
        )
        assert config.enabled is True
        assert config.exporter_type == "otlp"
        assert config.service_name == "pivot"


class TestLogging:
    """Tests for structlog setup."""

    def test_env_overrides_level(self, monkeypatch, capsys):
        """PIVOT_LOG_LEVEL wins over the argument."""
        import structlog

        from src.observability.logging import setup_logging

        monkeypatch.setenv("PIVOT_LOG_LEVEL", "ERROR")
        setup_logging(level="DEBUG", force=True)

        log = structlog.get_logger("test")
        log.info("hidden")
        log.error("shown")

        captured = capsys.readouterr()
        assert "hidden" not in captured.err
        assert "shown" in captured.err
        assert captured.out == ""

    def test_json_format(self, monkeypatch, capsys):
        """JSON format writes one object per line to stderr."""
        import json

        import structlog

        from src.observability.logging import setup_logging

        monkeypatch.setenv("PIVOT_LOG_LEVEL", "INFO")
        setup_logging(fmt="json", force=True)

        structlog.get_logger("test").info("hello", run="abc")

        line = capsys.readouterr().err.strip().splitlines()[-1]
        payload = json.loads(line)
        assert payload["event"] == "hello"
        assert payload["run"] == "abc"
