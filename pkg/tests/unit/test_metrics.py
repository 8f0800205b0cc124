"""
Unit tests for metrics module.
"""

from datetime import datetime
from unittest.mock import AsyncMock, Mock, patch

import pytest

from kackit.metrics import (
    CheckMetrics,
    InMemoryMetricsCollector,
    MetricsMiddleware,
    PrometheusMetricsCollector,
    create_metrics_system,
)


class TestCheckMetrics:
    """Test CheckMetrics dataclass."""

    def test_defaults(self):
        """Test optional fields default to None and a timestamp is taken."""
        metrics = CheckMetrics(check="wha check", duration=0.01, passed=True)
        assert metrics.residual is None
        assert metrics.error_type is None
        assert isinstance(metrics.timestamp, datetime)


class TestInMemoryMetricsCollector:
    """Test the in-memory collector."""

    async def test_get_stats_no_data(self):
        collector = InMemoryMetricsCollector()
        assert await collector.get_stats() == {"message": "No metrics available"}

    async def test_record_and_aggregate(self):
        """Test per-check aggregation of verdicts and residuals."""
        collector = InMemoryMetricsCollector()
        await collector.record_check(CheckMetrics("basis", 0.002, True, 1e-14))
        await collector.record_check(CheckMetrics("basis", 0.004, False, 0.5))
        await collector.record_check(CheckMetrics("square", 0.001, False, None, "DegenerateSquare"))

        stats = await collector.get_stats()
        performance = stats["check_performance"]
        assert performance["total_checks"] == 3
        assert performance["pass_rate"] == pytest.approx(1 / 3)
        assert performance["worst_residual"] == 0.5
        assert performance["max_duration_ms"] == pytest.approx(4.0)
        assert stats["error_summary"] == {"DegenerateSquare": 1}
        assert stats["checks"]["basis"] == {"runs": 2, "passed": 1, "worst_residual": 0.5}
        assert stats["checks"]["square"]["worst_residual"] == 0.0

    async def test_max_entries_limit(self):
        """Test old records are dropped once the buffer is full."""
        collector = InMemoryMetricsCollector(max_entries=2)
        for index in range(3):
            await collector.record_check(CheckMetrics(f"check{index}", 0.1, True))
        assert len(collector.check_metrics) == 2
        assert collector.check_metrics[0].check == "check1"
        assert collector.check_counts["check0"] == 1


class TestPrometheusMetricsCollector:
    """Test the Prometheus collector without prometheus_client installed."""

    async def test_unavailable_collector_is_a_no_op(self):
        with patch.dict("sys.modules", {"prometheus_client": None}):
            collector = PrometheusMetricsCollector()
            assert not collector._available
            assert collector.check_total is None
            await collector.record_check(CheckMetrics("markov", 0.1, True))
            assert await collector.get_stats() == {"error": "Prometheus client not available"}


class TestMetricsMiddleware:
    """Test the fan-out middleware."""

    async def test_records_to_every_collector(self):
        first, second = Mock(), Mock()
        first.record_check = AsyncMock()
        second.record_check = AsyncMock()
        middleware = MetricsMiddleware([first, second])

        await middleware.record_check_metrics("depth", 0.2, True, 0.0)

        first.record_check.assert_called_once()
        recorded = second.record_check.call_args[0][0]
        assert recorded.check == "depth"
        assert recorded.passed is True

    async def test_disabled_middleware_records_nothing(self):
        collector = Mock()
        collector.record_check = AsyncMock()
        middleware = MetricsMiddleware([collector])
        middleware.disable()
        await middleware.record_check_metrics("depth", 0.2, True)
        collector.record_check.assert_not_called()
        middleware.enable()
        await middleware.record_check_metrics("depth", 0.2, True)
        collector.record_check.assert_called_once()

    async def test_collector_error_handling(self):
        """Test a failing collector does not stop the others."""
        failing, healthy = Mock(), Mock()
        failing.record_check = AsyncMock(side_effect=RuntimeError("boom"))
        healthy.record_check = AsyncMock()
        middleware = MetricsMiddleware([failing, healthy])
        await middleware.record_check_metrics("square check", 0.1, False)
        healthy.record_check.assert_called_once()

    async def test_stats_skip_unavailable_collectors(self):
        unavailable = Mock()
        unavailable.get_stats = AsyncMock(return_value={"error": "nope"})
        memory = InMemoryMetricsCollector()
        await memory.record_check(CheckMetrics("wha check", 0.1, True))
        stats = await MetricsMiddleware([unavailable, memory]).get_stats()
        assert stats["check_performance"]["total_checks"] == 1


class TestCreateMetricsSystem:
    """Test the factory."""

    def test_create_memory_backend(self):
        metrics = create_metrics_system()
        assert len(metrics.collectors) == 1
        assert isinstance(metrics.collectors[0], InMemoryMetricsCollector)

    def test_create_with_prometheus(self):
        with patch("kackit.metrics.PrometheusMetricsCollector") as mock_prometheus:
            metrics = create_metrics_system(backend="memory", prometheus_enabled=True)
            assert len(metrics.collectors) == 2
            mock_prometheus.assert_called_once()

    def test_create_prometheus_only(self):
        with patch("kackit.metrics.PrometheusMetricsCollector") as mock_prometheus:
            metrics = create_metrics_system(backend="none", prometheus_enabled=True)
            assert len(metrics.collectors) == 1
            mock_prometheus.assert_called_once()
