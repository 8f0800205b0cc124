"""
Concurrent verification of independent objects.

Checks are plain callables; AsyncVerifier runs them on its own thread pool
and returns one BatchOutcome per check in input order. A check that raises
is captured in its outcome and does not cancel the others.
"""

import asyncio
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, List, Optional, Sequence, Tuple

from .base import AsyncContextManageable
from .constants import DEFAULT_EXECUTOR_THREADS, MAX_EXECUTOR_THREADS, MIN_EXECUTOR_THREADS
from .exceptions import ConfigurationError, KacKitError
from .metrics import MetricsMiddleware

logger = logging.getLogger(__name__)

Check = Tuple[str, Callable[[], Any]]


@dataclass(frozen=True)
class BatchOutcome:
    """
    Result of one check.

    Attributes:
        name: Label given with the check.
        value: Whatever the check returned, None if it raised.
        error: The exception it raised, if any.
        duration: Wall time in seconds.
    """

    name: str
    value: Any
    error: Optional[BaseException]
    duration: float

    @property
    def passed(self) -> bool:
        return self.error is None and bool(self.value)

    @property
    def residual(self) -> Optional[float]:
        for attribute in ("residual", "worst"):
            value = getattr(self.value, attribute, None)
            if isinstance(value, (int, float)):
                return float(value)
        return None


class AsyncVerifier(AsyncContextManageable):
    """
    Runs verification callables concurrently on a thread pool.

    Args:
        executor_threads: Size of the pool.
        metrics: Optional middleware receiving one record per check.

    Raises:
        ConfigurationError: If the thread count is outside the allowed range.
    """

    def __init__(self, executor_threads: int = DEFAULT_EXECUTOR_THREADS, metrics: Optional[MetricsMiddleware] = None):
        if not MIN_EXECUTOR_THREADS <= executor_threads <= MAX_EXECUTOR_THREADS:
            raise ConfigurationError(
                f"executor_threads must be between {MIN_EXECUTOR_THREADS} and {MAX_EXECUTOR_THREADS}, "
                f"got {executor_threads}"
            )
        self._executor = ThreadPoolExecutor(max_workers=executor_threads, thread_name_prefix="kackit")
        self._metrics = metrics
        self._closed = False
        self._close_lock = asyncio.Lock()

    @property
    def is_closed(self) -> bool:
        return self._closed

    async def _run_one(self, name: str, check: Callable[[], Any]) -> BatchOutcome:
        loop = asyncio.get_running_loop()
        start = time.perf_counter()
        try:
            value = await loop.run_in_executor(self._executor, check)
            outcome = BatchOutcome(name, value, None, time.perf_counter() - start)
        except Exception as e:
            logger.debug(f"check {name} raised {type(e).__name__}: {e}")
            outcome = BatchOutcome(name, None, e, time.perf_counter() - start)
        if self._metrics is not None:
            await self._metrics.record_check_metrics(
                name,
                outcome.duration,
                outcome.passed,
                outcome.residual,
                type(outcome.error).__name__ if outcome.error else None,
            )
        return outcome

    async def verify_all(self, checks: Sequence[Check]) -> List[BatchOutcome]:
        """Run every check; results follow the input order."""
        if self._closed:
            raise KacKitError("verifier is closed")
        return list(await asyncio.gather(*(self._run_one(name, check) for name, check in checks)))

    async def close(self) -> None:
        """Shut the pool down; idempotent."""
        async with self._close_lock:
            if not self._closed:
                self._closed = True
                loop = asyncio.get_running_loop()
                await loop.run_in_executor(None, self._executor.shutdown)


def run_checks(
    checks: Sequence[Check],
    executor_threads: int = DEFAULT_EXECUTOR_THREADS,
    metrics: Optional[MetricsMiddleware] = None,
) -> List[BatchOutcome]:
    """Synchronous entry point around AsyncVerifier."""

    async def _run() -> List[BatchOutcome]:
        async with AsyncVerifier(executor_threads, metrics) as verifier:
            return await verifier.verify_all(checks)

    return asyncio.run(_run())
