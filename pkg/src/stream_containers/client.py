"""The processing side: poll a container's window, transform, re-emit.

fetch_window reads membership from the container response and then
retrieves all members in one concurrent batch, so a cycle costs two
sequential round trips no matter how many members the window has. The
client never computes window membership itself.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum
from typing import Callable, Optional
from urllib.parse import urljoin

from .clock import Clock
from .core import timestamp_extract
from .errors import EmitError, FetchError, TransportError, TurtleParseError
from .rdf.temporal import Duration, Timestamp
from .rdf.terms import BlankNode, Graph, IRI, Literal, Triple
from .rdf.turtle import parse_turtle, serialize_turtle
from .transport import TURTLE, HttpRequest, Transport
from .vocab import LDP, LDPSC, SOSA, XSD

log = logging.getLogger(__name__)

_TURTLE_HEADERS = {"Accept": TURTLE}


class StreamOperatorKind(Enum):
    RSTREAM = "rstream"
    ISTREAM = "istream"
    DSTREAM = "dstream"


class MergePolicy(Enum):
    UNION = "union"


@dataclass(frozen=True)
class PollSchedule:
    """Evaluation instants t_i = t0 + i * beta, requests sent delta early."""

    t0: Timestamp
    beta: Duration
    count: Optional[int] = None
    delta_allowance: Duration = Duration(0)

    def __post_init__(self):
        if self.beta.ms <= 0:
            raise ValueError(f"polling period must be positive, got {self.beta}")
        if self.delta_allowance.ms < 0:
            raise ValueError("delta allowance cannot be negative")

    def eval_instant(self, i: int) -> Timestamp:
        return self.t0 + i * self.beta


@dataclass(frozen=True)
class WindowSnapshot:
    """Member graphs a client obtained for one window at one evaluation."""

    t_eval: Timestamp
    window: IRI
    members: dict[IRI, Graph]
    errors: dict[IRI, str] = field(default_factory=dict)

    @property
    def complete(self) -> bool:
        return not self.errors

    def member_iris(self) -> frozenset[IRI]:
        return frozenset(self.members) | frozenset(self.errors)


@dataclass(frozen=True)
class CycleRecord:
    index: int
    scheduled: Timestamp
    sent_at: Optional[Timestamp]
    completed_at: Optional[Timestamp]
    snapshot: Optional[WindowSnapshot]
    overrun: bool = False
    error: Optional[str] = None


def fetch_window(
    transport: Transport,
    container: IRI,
    window: IRI,
    t_eval: Optional[Timestamp] = None,
) -> WindowSnapshot:
    """Retrieve the current members of one window in two phases.

    Phase one GETs the container and reads the selected window's
    membership triples; phase two GETs every member concurrently.
    Raises FetchError if the container is unreachable or does not
    describe the window; individual member failures leave the snapshot
    incomplete instead.
    """
    result = transport.request(HttpRequest("GET", container.value, dict(_TURTLE_HEADERS)))
    if result.response.status != 200:
        raise FetchError(f"GET {container.value} returned {result.response.status}")
    body = parse_turtle(result.response.text(), container.value)
    member_iris = _membership_objects(body, container, window)

    requests = [HttpRequest("GET", iri.value, dict(_TURTLE_HEADERS)) for iri in member_iris]
    members: dict[IRI, Graph] = {}
    errors: dict[IRI, str] = {}
    results = transport.request_many(requests) if requests else []
    completed = result.completed_at
    for iri, res in zip(member_iris, results):
        completed = max(completed, res.completed_at)
        if res.response.status != 200:
            errors[iri] = f"status {res.response.status}"
            continue
        try:
            members[iri] = parse_turtle(res.response.text(), iri.value)
        except TurtleParseError as exc:
            errors[iri] = f"unparseable body: {exc}"
    return WindowSnapshot(
        t_eval=t_eval if t_eval is not None else completed,
        window=window,
        members=members,
        errors=errors,
    )


def _membership_objects(body: Graph, container: IRI, window: IRI) -> list[IRI]:
    member_relation = None
    for node in body.objects(subject=container, predicate=LDPSC.window):
        resources = list(body.objects(subject=node, predicate=LDP.membershipResource))
        if window in resources:
            relations = list(body.objects(subject=node, predicate=LDP.hasMemberRelation))
            if relations and isinstance(relations[0], IRI):
                member_relation = relations[0]
            break
    if member_relation is None:
        raise FetchError(f"container does not describe a window {window.value}")
    members = [o for o in body.objects(subject=window, predicate=member_relation) if isinstance(o, IRI)]
    return sorted(set(members), key=lambda iri: iri.value)


def run_polling(
    schedule: PollSchedule,
    container: IRI,
    window: IRI,
    handler: Optional[Callable[[WindowSnapshot], None]] = None,
    *,
    transport: Transport,
    clock: Clock,
) -> list[CycleRecord]:
    """Poll on the schedule so each request arrives at its t_i.

    Requests go out at t_i - delta, delta tracking a moving average of
    observed round-trip times seeded from the schedule's allowance.
    Cycles fire at a fixed rate: an overrun never shifts later instants,
    it is recorded on the cycle it delayed. The handler sees each
    snapshot in cycle order.
    """
    trace: list[CycleRecord] = []
    delta_ms = schedule.delta_allowance.ms
    i = 0
    while schedule.count is None or i < schedule.count:
        scheduled = schedule.eval_instant(i)
        send_at = scheduled - Duration(delta_ms)
        overrun = clock.now().epoch_ms > send_at.epoch_ms
        clock.sleep_until(send_at)
        sent = clock.now()
        try:
            snapshot = fetch_window(transport, container, window, t_eval=scheduled)
        except (FetchError, TransportError, TurtleParseError) as exc:
            log.warning("cycle %d failed: %s", i, exc)
            trace.append(CycleRecord(i, scheduled, sent, None, None, overrun, str(exc)))
            i += 1
            continue
        completed = clock.now()
        observed_ms = (completed - sent).ms
        if observed_ms >= 0:
            # delta targets one round trip; a fetch spans two phases
            # unless the window was empty
            phases = 2 if snapshot.member_iris() else 1
            delta_ms = round(0.7 * delta_ms + 0.3 * (observed_ms / phases))
        trace.append(CycleRecord(i, scheduled, sent, completed, snapshot, overrun))
        if handler is not None:
            handler(snapshot)
        i += 1
    return trace


def derive(
    kind: StreamOperatorKind,
    prev: Optional[WindowSnapshot],
    cur: WindowSnapshot,
) -> dict[IRI, Graph]:
    """Streaming-operator view of two adjacent cycles, keyed by element IRI."""
    if kind is StreamOperatorKind.RSTREAM:
        return dict(cur.members)
    if kind is StreamOperatorKind.ISTREAM:
        if prev is None:
            return dict(cur.members)
        return {iri: g for iri, g in cur.members.items() if iri not in prev.members}
    if kind is StreamOperatorKind.DSTREAM:
        if prev is None:
            return {}
        return {iri: g for iri, g in prev.members.items() if iri not in cur.members}
    raise ValueError(f"unknown operator {kind!r}")


def standardize_apart(graphs: dict[IRI, Graph]) -> Graph:
    """Union of member graphs with blank nodes renamed per source."""
    merged = []
    for i, iri in enumerate(sorted(graphs, key=lambda x: x.value)):
        for t in graphs[iri]:
            s = BlankNode(f"m{i}_{t.subject.label}") if isinstance(t.subject, BlankNode) else t.subject
            o = BlankNode(f"m{i}_{t.object.label}") if isinstance(t.object, BlankNode) else t.object
            merged.append(Triple(s, t.predicate, o))
    return Graph(merged)


def transform(
    snapshot: WindowSnapshot,
    policy: MergePolicy,
    fn: Callable[[Graph], Graph],
) -> Graph:
    """Merge the snapshot's members under the policy, then apply fn."""
    if policy is not MergePolicy.UNION:
        raise ValueError(f"unsupported merge policy {policy!r}")
    return fn(standardize_apart(snapshot.members))


def emit(
    result: Graph,
    timestamp_relation: IRI,
    t: Timestamp,
    sink: IRI,
    *,
    transport: Transport,
) -> IRI:
    """POST a result graph to a downstream container, stamping it if needed."""
    if not timestamp_extract(result, timestamp_relation):
        stamp = Triple(
            BlankNode("stamp"), timestamp_relation, Literal(t.isoformat(), XSD.dateTimeStamp)
        )
        result = result.union(Graph([stamp]))
    body = serialize_turtle(result, base=sink.value).encode("utf-8")
    res = transport.request(
        HttpRequest("POST", sink.value, {"Content-Type": f"{TURTLE}; charset=utf-8"}, body)
    )
    if res.response.status != 201:
        raise EmitError(
            f"POST {sink.value} returned {res.response.status}: {res.response.text().strip()}"
        )
    location = res.response.header("Location")
    if not location:
        raise EmitError(f"POST {sink.value} returned no Location header")
    return IRI(urljoin(sink.value, location))


# ---------------------------------------------------------------------------
# built-in R2R transforms for demos and the command line


def identity_transform(g: Graph) -> Graph:
    return g


def average_simple_result(g: Graph) -> Graph:
    """Average all sosa:hasSimpleResult values into a single triple."""
    values = []
    for t in g.match(predicate=SOSA.hasSimpleResult):
        if isinstance(t.object, Literal):
            try:
                values.append(Decimal(t.object.lexical))
            except ArithmeticError:
                continue
    if not values:
        return Graph()
    mean = sum(values) / len(values)
    lexical = format(mean, "f")
    if "." in lexical:
        lexical = lexical.rstrip("0").rstrip(".")
    if "." not in lexical:
        lexical += ".0"
    return Graph([Triple(BlankNode("avg"), SOSA.hasSimpleResult, Literal(lexical, XSD.decimal))])


BUILTIN_TRANSFORMS: dict[str, Callable[[Graph], Graph]] = {
    "identity": identity_transform,
    "average": average_simple_result,
}
