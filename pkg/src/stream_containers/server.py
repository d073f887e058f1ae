"""HTTP service exposing stream containers.

GET on a container evaluates every window at request-arrival time and
returns the full Turtle representation; POST appends a stream element;
PUT replaces the window specs; DELETE removes an element. The protocol
logic lives in ContainerService.handle(), which is transport-agnostic:
the socket binding below and the in-process simulated network both call
it with an explicit arrival instant.
"""

from __future__ import annotations

import logging
import re
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional
from urllib.parse import urlsplit

from .clock import Clock, RealClock
from .core import (
    ContainerSnapshot,
    StreamContainerState,
    container_representation,
)
from .errors import TurtleParseError, WindowSpecError
from .rdf.temporal import Duration, Timestamp, parse_duration
from .rdf.terms import IRI
from .rdf.turtle import parse_turtle, serialize_turtle
from .transport import TURTLE, HttpRequest, HttpResponse
from .vocab import LDP, LDPSC

log = logging.getLogger(__name__)

_ELEMENT_PATH = re.compile(r"^/\d+$")
_SCHEME = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*://")

CONTAINER_LINK = f'<{LDP.base}Container>; rel="type", <{LDPSC.base}StreamContainer>; rel="type"'


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    base_iri: Optional[str] = None
    containers: list[str] = field(default_factory=lambda: ["/stream"])
    retention: Optional[Duration] = None
    sweep_period: Duration = parse_duration("PT10S")

    def normalized_containers(self) -> list[str]:
        paths = []
        for raw in self.containers:
            path = "/" + raw.strip("/") if raw.strip("/") else ""
            paths.append(path)
        if len(set(paths)) != len(paths):
            raise ValueError("duplicate container paths")
        for a in paths:
            for b in paths:
                if a != b and b.startswith(a + "/" if a else "/"):
                    raise ValueError(f"container paths must be disjoint: {a or '/'} contains {b}")
        return paths


class _Managed:
    __slots__ = ("state", "lock")

    def __init__(self, state: StreamContainerState):
        self.state = state
        self.lock = threading.Lock()


class ContainerService:
    """Routes requests to containers; one lock per container."""

    def __init__(self, base_iri: str, container_paths: list[str], retention: Optional[Duration] = None):
        if not _SCHEME.match(base_iri):
            raise ValueError(f"base IRI must be absolute: {base_iri!r}")
        if "#" in base_iri:
            raise ValueError("base IRI must not carry a fragment")
        if urlsplit(base_iri).path not in ("", "/"):
            raise ValueError("base IRI must be an origin without a path")
        self.base_iri = base_iri.rstrip("/")
        self.containers: dict[str, _Managed] = {}
        for path in container_paths:
            iri = IRI(self.base_iri + path)
            self.containers[path] = _Managed(StreamContainerState(iri, retention=retention))

    # ------------------------------------------------------------------
    # request handling

    def handle(self, req: HttpRequest, now: Timestamp) -> HttpResponse:
        path = urlsplit(req.url).path
        route = self._route(path)
        if route is None:
            return _error(404, f"no such resource: {path}")
        managed, element_path = route
        try:
            if element_path is None:
                return self._handle_container(managed, req, now)
            return self._handle_element(managed, element_path, req)
        except TurtleParseError as exc:
            return _error(400, f"turtle syntax error: {exc}")
        except WindowSpecError as exc:
            return _error(400, f"invalid window specification: {exc}")

    def _route(self, path: str):
        if path != "/" and path.endswith("/"):
            return None
        lookup = "" if path == "/" else path
        if lookup in self.containers:
            return self.containers[lookup], None
        for cpath, managed in self.containers.items():
            prefix = cpath if cpath else ""
            if path.startswith(prefix + "/"):
                rest = path[len(prefix):]
                if _ELEMENT_PATH.match(rest):
                    return managed, rest
        return None

    def _handle_container(self, managed: _Managed, req: HttpRequest, now: Timestamp) -> HttpResponse:
        method = req.method.upper()
        if method == "OPTIONS":
            return HttpResponse(204, {"Allow": "GET, POST, PUT, OPTIONS"})
        if method == "GET":
            if not _accepts_turtle(req):
                return _error(406, "only text/turtle is served")
            with managed.lock:
                snapshot = managed.state.snapshot()
            body = serialize_turtle(
                container_representation(snapshot, now), base=snapshot.base.value
            ).encode("utf-8")
            return HttpResponse(
                200,
                {
                    "Content-Type": f"{TURTLE}; charset=utf-8",
                    "Link": CONTAINER_LINK,
                    "Cache-Control": "no-cache",
                },
                body,
            )
        if method == "POST":
            if not _content_is_turtle(req):
                return _error(415, "only text/turtle payloads are accepted")
            graph = parse_turtle(req.body.decode("utf-8"), managed.state.base.value)
            with managed.lock:
                element = managed.state.append(graph, arrival=now)
                location = element.iri(managed.state.base).value
            return HttpResponse(201, {"Location": location})
        if method == "PUT":
            if not _content_is_turtle(req):
                return _error(415, "only text/turtle payloads are accepted")
            graph = parse_turtle(req.body.decode("utf-8"), managed.state.base.value)
            with managed.lock:
                managed.state.update_windows(graph)
            return HttpResponse(204, {})
        return _error(405, f"{method} is not allowed on a container", allow="GET, POST, PUT, OPTIONS")

    def _handle_element(self, managed: _Managed, element_path: str, req: HttpRequest) -> HttpResponse:
        method = req.method.upper()
        if method == "OPTIONS":
            with managed.lock:
                exists = managed.state.element(element_path) is not None
            if not exists:
                return _error(404, f"no such element: {element_path}")
            return HttpResponse(204, {"Allow": "GET, DELETE, OPTIONS"})
        if method == "GET":
            if not _accepts_turtle(req):
                return _error(406, "only text/turtle is served")
            with managed.lock:
                element = managed.state.element(element_path)
                base = managed.state.base
            if element is None:
                return _error(404, f"no such element: {element_path}")
            body = serialize_turtle(element.graph, base=element.iri(base).value).encode("utf-8")
            return HttpResponse(
                200,
                {
                    "Content-Type": f"{TURTLE}; charset=utf-8",
                    "Cache-Control": "max-age=31536000, immutable",
                },
                body,
            )
        if method == "DELETE":
            with managed.lock:
                removed = managed.state.delete(element_path)
            if not removed:
                return _error(404, f"no such element: {element_path}")
            return HttpResponse(204, {})
        return _error(405, f"{method} is not allowed on an element", allow="GET, DELETE, OPTIONS")

    # ------------------------------------------------------------------

    def state(self, container_path: str) -> StreamContainerState:
        return self.containers[container_path].state

    def snapshot(self, container_path: str) -> ContainerSnapshot:
        managed = self.containers[container_path]
        with managed.lock:
            return managed.state.snapshot()

    def sweep(self, now: Timestamp) -> dict[str, list[str]]:
        """Apply retention everywhere; returns removed paths per container."""
        removed = {}
        for path, managed in self.containers.items():
            with managed.lock:
                dropped = managed.state.apply_retention(now)
            if dropped:
                removed[path] = dropped
                log.info("retention removed %d element(s) from %s", len(dropped), path or "/")
        return removed


def _content_is_turtle(req: HttpRequest) -> bool:
    declared = req.header("Content-Type")
    if declared is None:
        return True
    return declared.split(";")[0].strip().lower() == TURTLE


def _accepts_turtle(req: HttpRequest) -> bool:
    accept = req.header("Accept")
    if accept is None:
        return True
    for item in accept.split(","):
        media = item.split(";")[0].strip().lower()
        if media in (TURTLE, "text/*", "*/*"):
            return True
    return False


def _error(status: int, message: str, allow: Optional[str] = None) -> HttpResponse:
    headers = {"Content-Type": "text/plain; charset=utf-8"}
    if allow:
        headers["Allow"] = allow
    return HttpResponse(status, headers, (message + "\n").encode("utf-8"))


# ---------------------------------------------------------------------------
# socket binding


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "StreamContainers/0.1"

    def _dispatch(self):
        clock: Clock = self.server.clock  # type: ignore[attr-defined]
        service: ContainerService = self.server.service  # type: ignore[attr-defined]
        arrival = clock.now()
        length = int(self.headers.get("Content-Length") or 0)
        body = self.rfile.read(length) if length else b""
        request = HttpRequest(self.command, self.path, dict(self.headers.items()), body)
        delay = getattr(self.server, "debug_delay_s", 0.0)
        if delay:
            time.sleep(delay)
        response = service.handle(request, arrival)
        self.send_response(response.status)
        for key, value in response.headers.items():
            if key.lower() != "content-length":
                self.send_header(key, value)
        self.send_header("Content-Length", str(len(response.body)))
        self.end_headers()
        if response.body:
            self.wfile.write(response.body)

    do_GET = do_POST = do_PUT = do_DELETE = do_OPTIONS = _dispatch

    def log_message(self, fmt, *args):
        log.debug("%s - %s", self.address_string(), fmt % args)


class StreamContainerServer:
    """ThreadingHTTPServer wrapper with an optional retention sweeper."""

    def __init__(self, config: ServerConfig, clock: Optional[Clock] = None):
        self.config = config
        self.clock = clock or RealClock()
        self._httpd = ThreadingHTTPServer((config.host, config.port), _Handler)
        self.port = self._httpd.server_address[1]
        base_iri = config.base_iri or f"http://{config.host}:{self.port}"
        self.service = ContainerService(
            base_iri, config.normalized_containers(), retention=config.retention
        )
        self._httpd.service = self.service  # type: ignore[attr-defined]
        self._httpd.clock = self.clock  # type: ignore[attr-defined]
        self._threads: list[threading.Thread] = []
        self._stop = threading.Event()

    @property
    def base_iri(self) -> str:
        return self.service.base_iri

    def container_iri(self, path: str) -> str:
        norm = "/" + path.strip("/") if path.strip("/") else ""
        return self.service.base_iri + norm

    def start(self) -> None:
        serve = threading.Thread(target=self._httpd.serve_forever, daemon=True, name="sc-http")
        serve.start()
        self._threads.append(serve)
        if self.config.retention is not None:
            sweeper = threading.Thread(target=self._sweep_loop, daemon=True, name="sc-sweep")
            sweeper.start()
            self._threads.append(sweeper)
        log.info("serving %d container(s) at %s", len(self.service.containers), self.base_iri)

    def _sweep_loop(self) -> None:
        period_s = max(self.config.sweep_period.ms, 1) / 1000.0
        while not self._stop.wait(period_s):
            self.service.sweep(self.clock.now())

    def serve_forever(self) -> None:
        self.start()
        try:
            self._stop.wait()
        except KeyboardInterrupt:
            pass
        finally:
            self.shutdown()

    def shutdown(self) -> None:
        self._stop.set()
        self._httpd.shutdown()
        self._httpd.server_close()
