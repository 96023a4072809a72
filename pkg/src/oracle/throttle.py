"""
Request throttling for remote oracles.

Combines an in-flight limit with a sliding one-minute request window. Calls
wait for capacity instead of failing.
"""

import time
from collections import deque
from contextlib import asynccontextmanager
from dataclasses import dataclass
from typing import AsyncIterator, Callable, Deque, Dict

import anyio
import structlog

logger = structlog.get_logger(__name__)

WINDOW_SECONDS = 60.0


@dataclass
class ThrottleConfig:
    """Limits for one remote endpoint."""
    max_in_flight: int = 4
    requests_per_minute: int = 60


class RequestThrottle:
    """
    In-flight and per-minute limiter.

    Example:
        throttle = RequestThrottle(ThrottleConfig(max_in_flight=2))
        async with throttle.slot():
            response = await client.post(...)
    """

    def __init__(
        self,
        config: ThrottleConfig,
        clock: Callable[[], float] = time.monotonic,
    ):
        self.config = config
        self._clock = clock
        self._limiter = anyio.CapacityLimiter(config.max_in_flight)
        self._lock = anyio.Lock()
        self._window: Deque[float] = deque()
        self._waits = 0

    def _expire(self, now: float) -> None:
        while self._window and now - self._window[0] >= WINDOW_SECONDS:
            self._window.popleft()

    async def _reserve(self) -> None:
        while True:
            async with self._lock:
                now = self._clock()
                self._expire(now)
                if len(self._window) < self.config.requests_per_minute:
                    self._window.append(now)
                    return
                delay = WINDOW_SECONDS - (now - self._window[0])
            self._waits += 1
            logger.debug("Throttling oracle request", delay_seconds=round(delay, 3))
            await anyio.sleep(max(delay, 0.0))

    @asynccontextmanager
    async def slot(self) -> AsyncIterator[None]:
        """Hold one request slot for the duration of the block."""
        async with self._limiter:
            await self._reserve()
            yield

    def get_usage(self) -> Dict[str, int]:
        """Current window usage (for debugging/testing)."""
        self._expire(self._clock())
        return {
            "in_flight": int(self._limiter.borrowed_tokens),
            "window_requests": len(self._window),
            "requests_per_minute": self.config.requests_per_minute,
            "throttled_waits": self._waits,
        }
