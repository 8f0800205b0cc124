"""
Metrics for verification runs.

Each verified object produces one CheckMetrics record: which check ran, how
long it took, its verdict and its worst residual. Collectors aggregate them;
the CLI prints the in-memory aggregate with --stats.
"""

import asyncio
import logging
from collections import defaultdict, deque
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import TYPE_CHECKING, Any, Dict, List, Optional

if TYPE_CHECKING:
    from prometheus_client import Counter, Gauge, Histogram

logger = logging.getLogger(__name__)


@dataclass
class CheckMetrics:
    """Metrics for one verification."""

    check: str
    duration: float
    passed: bool
    residual: Optional[float] = None
    error_type: Optional[str] = None
    timestamp: datetime = field(default_factory=lambda: datetime.now(timezone.utc))


class MetricsCollector:
    """Base class for metrics collection backends."""

    async def record_check(self, metrics: CheckMetrics) -> None:
        """Record one verification."""
        raise NotImplementedError

    async def get_stats(self) -> Dict[str, Any]:
        """Get aggregated statistics."""
        raise NotImplementedError


class InMemoryMetricsCollector(MetricsCollector):
    """Bounded in-memory collector used by the CLI and the tests."""

    def __init__(self, max_entries: int = 10000):
        self.max_entries = max_entries
        self.check_metrics: deque = deque(maxlen=max_entries)
        self.error_counts: Dict[str, int] = defaultdict(int)
        self.check_counts: Dict[str, int] = defaultdict(int)
        self._lock = asyncio.Lock()

    async def record_check(self, metrics: CheckMetrics) -> None:
        async with self._lock:
            self.check_metrics.append(metrics)
            self.check_counts[metrics.check] += 1
            if metrics.error_type:
                self.error_counts[metrics.error_type] += 1

    async def get_stats(self) -> Dict[str, Any]:
        async with self._lock:
            if not self.check_metrics:
                return {"message": "No metrics available"}

            durations = [m.duration for m in self.check_metrics]
            residuals = [m.residual for m in self.check_metrics if m.residual is not None]
            by_check: Dict[str, Dict[str, Any]] = {}
            for m in self.check_metrics:
                entry = by_check.setdefault(m.check, {"runs": 0, "passed": 0, "worst_residual": 0.0})
                entry["runs"] += 1
                entry["passed"] += int(m.passed)
                if m.residual is not None:
                    entry["worst_residual"] = max(entry["worst_residual"], m.residual)

            return {
                "check_performance": {
                    "total_checks": len(self.check_metrics),
                    "avg_duration_ms": sum(durations) / len(durations) * 1000,
                    "min_duration_ms": min(durations) * 1000,
                    "max_duration_ms": max(durations) * 1000,
                    "pass_rate": sum(1 for m in self.check_metrics if m.passed) / len(self.check_metrics),
                    "worst_residual": max(residuals, default=None),
                },
                "error_summary": dict(self.error_counts),
                "checks": by_check,
            }


class PrometheusMetricsCollector(MetricsCollector):
    """Prometheus collector; a no-op when prometheus_client is not installed."""

    def __init__(self) -> None:
        self._available = False
        self.check_duration: Optional["Histogram"] = None
        self.check_total: Optional["Counter"] = None
        self.worst_residual: Optional["Gauge"] = None
        self.error_total: Optional["Counter"] = None

        try:
            from prometheus_client import Counter, Gauge, Histogram

            self.check_duration = Histogram(
                "kackit_check_duration_seconds", "Time spent in verification checks", ["check", "verdict"]
            )
            self.check_total = Counter("kackit_checks_total", "Number of verification checks", ["check", "verdict"])
            self.worst_residual = Gauge("kackit_check_residual", "Residual of the latest check", ["check"])
            self.error_total = Counter("kackit_errors_total", "Checks that raised", ["error_type"])
            self._available = True
        except ImportError:
            logger.warning("prometheus_client not available, metrics disabled")

    async def record_check(self, metrics: CheckMetrics) -> None:
        if not self._available:
            return
        verdict = "pass" if metrics.passed else "fail"
        if self.check_duration is not None:
            self.check_duration.labels(check=metrics.check, verdict=verdict).observe(metrics.duration)
        if self.check_total is not None:
            self.check_total.labels(check=metrics.check, verdict=verdict).inc()
        if metrics.residual is not None and self.worst_residual is not None:
            self.worst_residual.labels(check=metrics.check).set(metrics.residual)
        if metrics.error_type and self.error_total is not None:
            self.error_total.labels(error_type=metrics.error_type).inc()

    async def get_stats(self) -> Dict[str, Any]:
        if not self._available:
            return {"error": "Prometheus client not available"}
        return {"message": "Metrics available via Prometheus endpoint"}


class MetricsMiddleware:
    """Fans check metrics out to every collector."""

    def __init__(self, collectors: List[MetricsCollector]):
        self.collectors = collectors
        self._enabled = True

    def enable(self) -> None:
        self._enabled = True

    def disable(self) -> None:
        self._enabled = False

    async def record_check_metrics(
        self,
        check: str,
        duration: float,
        passed: bool,
        residual: Optional[float] = None,
        error_type: Optional[str] = None,
    ) -> None:
        if not self._enabled:
            return
        metrics = CheckMetrics(check, duration, passed, residual, error_type)
        for collector in self.collectors:
            try:
                await collector.record_check(metrics)
            except Exception as e:
                logger.warning(f"Failed to record metrics: {e}")

    async def get_stats(self) -> Dict[str, Any]:
        """Stats of the first collector that has any."""
        for collector in self.collectors:
            stats = await collector.get_stats()
            if "error" not in stats:
                return stats
        return {"message": "No metrics available"}


def create_metrics_system(backend: str = "memory", prometheus_enabled: bool = False) -> MetricsMiddleware:
    """Create a metrics system with the given backend."""
    collectors: List[MetricsCollector] = []
    if backend == "memory":
        collectors.append(InMemoryMetricsCollector())
    if prometheus_enabled:
        collectors.append(PrometheusMetricsCollector())
    return MetricsMiddleware(collectors)
