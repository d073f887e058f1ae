"""Clock abstraction: real wall time or a manually driven instant.

All window semantics read the clock through this interface so tests and
the verify harness can run on deterministic time.
"""

from __future__ import annotations

import time
from typing import Protocol

from .rdf.temporal import Timestamp


class Clock(Protocol):
    def now(self) -> Timestamp: ...

    def sleep_until(self, t: Timestamp) -> None: ...


class RealClock:
    def now(self) -> Timestamp:
        return Timestamp(int(time.time() * 1000))

    def sleep_until(self, t: Timestamp) -> None:
        delay_ms = t.epoch_ms - self.now().epoch_ms
        if delay_ms > 0:
            time.sleep(delay_ms / 1000.0)


class ManualClock:
    """Frozen clock; advances only when told to. Not agenda-aware."""

    def __init__(self, start: Timestamp):
        self._now = start

    def now(self) -> Timestamp:
        return self._now

    def advance_to(self, t: Timestamp) -> None:
        if t.epoch_ms > self._now.epoch_ms:
            self._now = t

    def sleep_until(self, t: Timestamp) -> None:
        self.advance_to(t)
