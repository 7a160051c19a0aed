"""Clock abstraction so pipelines can run against real or simulated time."""

from __future__ import annotations

import threading
import time


class Clock:
    """Monotonic time source; subclasses decide what a second costs."""

    def now(self) -> float:
        raise NotImplementedError

    def sleep(self, seconds: float) -> None:
        raise NotImplementedError


class MonotonicClock(Clock):
    """Wall-clock backed by time.monotonic; sleeps really sleep."""

    def now(self) -> float:
        return time.monotonic()

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            time.sleep(seconds)


class VirtualClock(Clock):
    """Manually driven clock: sleep() advances time instantly.

    With ``tick`` > 0 every now() call also advances time by that amount,
    which keeps timestamp sequences strictly increasing in simulations
    where no simulated delay is configured.
    """

    def __init__(self, start: float = 0.0, tick: float = 0.0):
        self._now = start
        self._tick = tick
        self._lock = threading.Lock()

    def now(self) -> float:
        with self._lock:
            current = self._now
            self._now += self._tick
            return current

    def sleep(self, seconds: float) -> None:
        if seconds < 0:
            raise ValueError("cannot sleep a negative duration")
        with self._lock:
            self._now += seconds

    def advance(self, seconds: float) -> None:
        self.sleep(seconds)
