"""Deterministic in-process environment: virtual clock and transport.

The simulated transport delivers every request exactly one latency
after it is sent and completes it at the same instant, so a fetch
cycle's two phases cost exactly two latencies of virtual time. External
stream activity (scheduled POSTs) fires from the clock's agenda the
moment virtual time first reaches it, before any request arriving at or
after that instant is handled.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

from .client import PollSchedule, run_polling
from .core import timestamp_extract
from .errors import TransportError
from .oracle import (
    EquivalenceReport,
    SlidingWindowSpec,
    StreamEntry,
    TupleStream,
    check_equivalence,
)
from .rdf.temporal import Duration, Timestamp, parse_duration
from .rdf.terms import BlankNode, Graph, IRI, Literal, Triple
from .rdf.turtle import parse_turtle, serialize_turtle
from .server import ContainerService
from .transport import TURTLE, HttpRequest, HttpResponse, TransportResult
from .vocab import EX, LDP, LDPSC, SOSA, XSD


class SimClock:
    """Virtual time: advances only explicitly, firing agenda events in order."""

    def __init__(self, start: Timestamp):
        self._now = start
        self._agenda: list[tuple[int, int, Callable[[], None]]] = []
        self._seq = 0

    def now(self) -> Timestamp:
        return self._now

    def schedule(self, at: Timestamp, fn: Callable[[], None]) -> None:
        heapq.heappush(self._agenda, (at.epoch_ms, self._seq, fn))
        self._seq += 1

    def advance_to(self, t: Timestamp) -> None:
        while self._agenda and self._agenda[0][0] <= t.epoch_ms:
            at_ms, _, fn = heapq.heappop(self._agenda)
            if at_ms > self._now.epoch_ms:
                self._now = Timestamp(at_ms)
            fn()
        if t.epoch_ms > self._now.epoch_ms:
            self._now = t

    def advance_by(self, d: Duration) -> None:
        self.advance_to(self._now + d)

    def sleep_until(self, t: Timestamp) -> None:
        self.advance_to(t)

    def drain(self) -> None:
        """Fire every remaining agenda event."""
        while self._agenda:
            self.advance_to(Timestamp(self._agenda[0][0]))


class SimNetwork:
    """Routes request URLs to in-process services by origin."""

    def __init__(self):
        self._services: dict[str, ContainerService] = {}

    def add(self, service: ContainerService) -> None:
        self._services[service.base_iri] = service

    def route(self, url: str) -> ContainerService:
        for origin, service in self._services.items():
            if url == origin or url.startswith(origin + "/") or url.startswith(origin + "#"):
                return service
        raise TransportError(f"no simulated server for {url}")


class SimTransport:
    """Each request arrives and completes exactly one latency after send."""

    def __init__(self, network: SimNetwork, clock: SimClock, latency: Duration):
        if latency.ms < 0:
            raise ValueError("latency cannot be negative")
        self.network = network
        self.clock = clock
        self.latency = latency

    def request(self, req: HttpRequest) -> TransportResult:
        sent = self.clock.now()
        arrival = sent + self.latency
        self.clock.advance_to(arrival)
        response = self._deliver(req)
        return TransportResult(response, sent, self.clock.now())

    def request_many(self, reqs: Sequence[HttpRequest]) -> list[TransportResult]:
        if not reqs:
            return []
        sent = self.clock.now()
        arrival = sent + self.latency
        self.clock.advance_to(arrival)
        results = [TransportResult(self._deliver(r), sent, arrival) for r in reqs]
        return results

    def _deliver(self, req: HttpRequest) -> HttpResponse:
        service = self.network.route(req.url)
        return service.handle(req, self.clock.now())


class SimulatedEnvironment:
    """Bundle of one virtual clock, one network, and a fixed latency."""

    def __init__(self, latency: Duration, clock_start: Timestamp):
        self.clock = SimClock(clock_start)
        self.network = SimNetwork()
        self.latency = latency

    def add_service(
        self,
        base_iri: str,
        container_paths: Sequence[str] = ("",),
        retention: Optional[Duration] = None,
    ) -> ContainerService:
        service = ContainerService(base_iri, list(container_paths), retention=retention)
        self.network.add(service)
        return service

    def transport(self) -> SimTransport:
        return SimTransport(self.network, self.clock, self.latency)

    def schedule_post(
        self,
        at: Timestamp,
        container: IRI,
        graph: Graph,
        on_created: Optional[Callable[[IRI], None]] = None,
    ) -> None:
        """Deliver a POST to the container the moment virtual time reaches at."""
        body = serialize_turtle(graph, base=container.value).encode("utf-8")
        req = HttpRequest("POST", container.value, {"Content-Type": TURTLE}, body)

        def fire():
            service = self.network.route(container.value)
            response = service.handle(req, self.clock.now())
            if response.status != 201:
                raise TransportError(
                    f"scheduled POST to {container.value} failed: {response.status}"
                )
            if on_created is not None:
                on_created(IRI(response.header("Location")))

        self.clock.schedule(at, fire)


def simulated_environment(latency: Duration, clock_start: Timestamp) -> SimulatedEnvironment:
    return SimulatedEnvironment(latency, clock_start)


# ---------------------------------------------------------------------------
# scenarios: an element stream plus a window, replayed deterministically


@dataclass(frozen=True)
class ScenarioElement:
    offset: Duration
    graph: Graph


@dataclass(frozen=True)
class Scenario:
    name: str
    elements: tuple[ScenarioElement, ...]


def parse_scenario_file(path: Path) -> Scenario:
    """One element per line: <offset duration> <turtle file path>.

    Offsets are relative to the polling start t0 and may be negative.
    Blank lines and '#' comments are skipped; file paths resolve
    relative to the scenario file.
    """
    path = Path(path)
    elements = []
    for raw in path.read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        offset_text, _, file_text = line.partition(" ")
        if not file_text.strip():
            raise ValueError(f"scenario line needs '<offset> <file>': {raw!r}")
        offset = parse_duration(offset_text)
        ttl_path = path.parent / file_text.strip()
        graph = parse_turtle(
            ttl_path.read_text(encoding="utf-8"), f"http://scenario.invalid/{ttl_path.stem}"
        )
        elements.append(ScenarioElement(offset, graph))
    name = path.parent.name if path.stem == "scenario" else path.stem
    return Scenario(name, tuple(elements))


@dataclass(frozen=True)
class ScenarioRun:
    report: EquivalenceReport
    container: IRI
    window: IRI
    stream: TupleStream
    trace: tuple


SIM_BASE = "http://sim.local"


def run_scenario(
    scenario: Scenario,
    alpha: Duration,
    beta: Duration,
    t0: Timestamp,
    cycles: int,
    latency: Duration,
    timestamp_relation: IRI = SOSA.resultTime,
    member_relation: IRI = EX.inWindow,
    window_fragment: str = "#window1",
) -> ScenarioRun:
    """Replay a scenario end to end and compare client trace to oracle.

    Elements POST at t0 + offset; any element without a timestamp under
    the timestamp relation is stamped with its own arrival instant. The
    polling client sends each request one latency early so it arrives
    exactly at each evaluation instant.
    """
    arrivals = [t0 + e.offset for e in scenario.elements]
    floor = t0 - latency - parse_duration("PT1S")
    clock_start = min(arrivals + [floor])
    env = simulated_environment(latency, clock_start)
    service = env.add_service(SIM_BASE, [""])
    container = IRI(SIM_BASE)
    window = IRI(SIM_BASE + window_fragment)

    spec_node = BlankNode("w")
    put_body = serialize_turtle(
        Graph(
            [
                Triple(container, LDPSC.window, spec_node),
                Triple(spec_node, LDP.hasMemberRelation, member_relation),
                Triple(spec_node, LDP.membershipResource, window),
                Triple(spec_node, LDPSC.contentTimestampRelation, timestamp_relation),
                Triple(spec_node, LDPSC.logical, Literal(alpha.isoformat(), XSD.duration)),
            ]
        ),
        base=SIM_BASE,
    ).encode("utf-8")
    put_resp = service.handle(
        HttpRequest("PUT", container.value, {"Content-Type": TURTLE}, put_body), env.clock.now()
    )
    if put_resp.status != 204:
        raise TransportError(f"window setup failed: {put_resp.status} {put_resp.body!r}")

    stamped: list[Graph] = []
    locations: dict[int, IRI] = {}
    for k, (element, arrival) in enumerate(zip(scenario.elements, arrivals)):
        graph = element.graph
        if not timestamp_extract(graph, timestamp_relation):
            graph = graph.union(
                Graph(
                    [
                        Triple(
                            BlankNode("stamp"),
                            timestamp_relation,
                            Literal(arrival.isoformat(), XSD.dateTimeStamp),
                        )
                    ]
                )
            )
        stamped.append(graph)
        env.schedule_post(
            arrival, container, graph, on_created=lambda iri, k=k: locations.__setitem__(k, iri)
        )

    schedule = PollSchedule(t0=t0, beta=beta, count=cycles, delta_allowance=latency)
    trace = run_polling(schedule, container, window, transport=env.transport(), clock=env.clock)
    env.clock.drain()

    entries = []
    for k, graph in enumerate(stamped):
        for t in sorted(timestamp_extract(graph, timestamp_relation)):
            entries.append(StreamEntry(graph, t, locations[k]))
    stream = TupleStream(tuple(entries))
    report = check_equivalence(
        trace, SlidingWindowSpec(alpha, beta, t0), stream, expected_cycles=cycles
    )
    return ScenarioRun(report, container, window, stream, tuple(trace))


def random_scenario(rng: random.Random, index: int = 0):
    """Seeded scenario + window parameters for the equivalence suite.

    Sizes stay at desk scale: up to 100 elements and 20 cycles, window
    and step between one second and ten minutes, latency small enough
    that a cycle's two phases always finish before the next send.
    """
    alpha = Duration(rng.randint(1_000, 600_000))
    beta = Duration(rng.randint(1_000, 600_000))
    cycles = rng.randint(1, 20)
    latency = Duration(rng.randint(0, min(250, beta.ms // 2)))
    span = (cycles - 1) * beta.ms
    elements = []
    for k in range(rng.randint(0, 100)):
        offset = Duration(rng.randint(-alpha.ms - 30_000, span + 10_000))
        subject = IRI(f"http://sensors.example/{index}/obs/{k}")
        graph = Graph(
            [
                Triple(subject, SOSA.observedProperty, EX.temperature),
                Triple(subject, SOSA.hasSimpleResult, Literal(f"{rng.uniform(-40.0, 40.0):.2f}", XSD.decimal)),
            ]
        )
        elements.append(ScenarioElement(offset, graph))
    return Scenario(f"random-{index}", tuple(elements)), alpha, beta, cycles, latency
