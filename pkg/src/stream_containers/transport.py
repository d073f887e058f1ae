"""HTTP message types and the client-side transport interface.

The same request/response shapes travel over real sockets and over the
in-process simulated network, so protocol logic never depends on which
one is underneath.
"""

from __future__ import annotations

import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Protocol, Sequence

from .clock import Clock, RealClock
from .errors import TransportError
from .rdf.temporal import Timestamp

TURTLE = "text/turtle"


@dataclass(frozen=True)
class HttpRequest:
    method: str
    url: str
    headers: dict[str, str] = field(default_factory=dict)
    body: bytes = b""

    def header(self, name: str) -> Optional[str]:
        for key, value in self.headers.items():
            if key.lower() == name.lower():
                return value
        return None


@dataclass(frozen=True)
class HttpResponse:
    status: int
    headers: dict[str, str] = field(default_factory=dict)
    body: bytes = b""

    def header(self, name: str) -> Optional[str]:
        for key, value in self.headers.items():
            if key.lower() == name.lower():
                return value
        return None

    def text(self) -> str:
        return self.body.decode("utf-8")


@dataclass(frozen=True)
class TransportResult:
    response: HttpResponse
    sent_at: Timestamp
    completed_at: Timestamp

    def round_trip(self):
        return self.completed_at - self.sent_at


class Transport(Protocol):
    """One request, or a batch issued concurrently in a single phase."""

    def request(self, req: HttpRequest) -> TransportResult: ...

    def request_many(self, reqs: Sequence[HttpRequest]) -> list[TransportResult]: ...


class RealTransport:
    """urllib-backed transport; batches fan out over a thread pool."""

    def __init__(self, clock: Optional[Clock] = None, timeout: float = 10.0, pool_size: int = 16):
        self.clock = clock or RealClock()
        self.timeout = timeout
        self.pool_size = pool_size

    def request(self, req: HttpRequest) -> TransportResult:
        sent = self.clock.now()
        response = self._roundtrip(req)
        return TransportResult(response, sent, self.clock.now())

    def request_many(self, reqs: Sequence[HttpRequest]) -> list[TransportResult]:
        if not reqs:
            return []
        sent = self.clock.now()
        with ThreadPoolExecutor(max_workers=min(self.pool_size, len(reqs))) as pool:
            responses = list(pool.map(self._roundtrip, reqs))
        done = self.clock.now()
        return [TransportResult(resp, sent, done) for resp in responses]

    def _roundtrip(self, req: HttpRequest) -> HttpResponse:
        request = urllib.request.Request(
            req.url, data=req.body if req.body else None, method=req.method
        )
        for key, value in req.headers.items():
            request.add_header(key, value)
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as raw:
                return HttpResponse(raw.status, dict(raw.headers.items()), raw.read())
        except urllib.error.HTTPError as exc:
            return HttpResponse(exc.code, dict(exc.headers.items()), exc.read())
        except OSError as exc:
            raise TransportError(f"{req.method} {req.url}: {exc}") from exc
