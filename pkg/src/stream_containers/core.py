"""Stream container state and window semantics.

A container holds an ordered sequence of stream elements (RDF graphs
appended via POST) plus a set of window specifications. Window
evaluation is pure: logical windows select elements whose extracted
timestamp lies in (t_eval - alpha, t_eval], physical windows the n
elements with the greatest maximum timestamp. Membership triples are
rematerialized from scratch on every evaluation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from .errors import DurationError, TimestampError, WindowSpecError
from .rdf.temporal import Duration, Timestamp, parse_duration, parse_timestamp
from .rdf.terms import BlankNode, Graph, IRI, Literal, Triple
from .vocab import LDP, LDPSC, RDF, XSD

log = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class LogicalWindow:
    """Time-based window size: elements newer than alpha at evaluation."""

    alpha: Duration

    def __post_init__(self):
        if self.alpha.ms <= 0:
            raise WindowSpecError(f"logical window size must be positive, got {self.alpha}")


@dataclass(frozen=True, slots=True)
class PhysicalWindow:
    """Count-based window size: the n most recent elements."""

    count: int

    def __post_init__(self):
        if self.count < 1:
            raise WindowSpecError(f"physical window size must be >= 1, got {self.count}")


WindowKind = Union[LogicalWindow, PhysicalWindow]


@dataclass(frozen=True, slots=True)
class WindowSpec:
    member_relation: IRI
    membership_resource: IRI
    content_timestamp_relation: IRI
    kind: WindowKind


@dataclass(frozen=True, slots=True)
class StreamElement:
    path: str
    graph: Graph
    seq: int
    arrival: Timestamp

    def iri(self, base: IRI) -> IRI:
        return element_iri(base, self.path)


@dataclass(frozen=True, slots=True)
class MemberSet:
    """Result of one window evaluation; members ordered by seq."""

    window: IRI
    members: tuple[StreamElement, ...]
    t_eval: Optional[Timestamp] = None

    def paths(self) -> frozenset[str]:
        return frozenset(e.path for e in self.members)


def element_iri(base: IRI, path: str) -> IRI:
    """Element IRIs live directly under the container IRI."""
    return IRI(base.value.rstrip("/") + path)


def timestamp_extract(g: Graph, pred: IRI) -> set[Timestamp]:
    """All instants reachable in g as (s, pred, literal-parsing-as-dateTimeStamp).

    An empty set means the graph carries no timestamp under this
    predicate; unparseable objects are skipped rather than fatal.
    """
    out: set[Timestamp] = set()
    for t in g.match(predicate=pred):
        if isinstance(t.object, Literal):
            try:
                out.add(parse_timestamp(t.object.lexical))
            except TimestampError:
                continue
    return out


class StreamContainerState:
    """Mutable container state; callers serialize writes (see server)."""

    def __init__(
        self,
        base: IRI,
        windows: Iterable[WindowSpec] = (),
        retention: Optional[Duration] = None,
    ):
        self.base = base
        self.elements: list[StreamElement] = []
        self.windows: tuple[WindowSpec, ...] = tuple(windows)
        self.retention = retention
        self._next_seq = 0

    def append(self, g: Graph, arrival: Timestamp) -> StreamElement:
        """Insert one stream element; allocates the next never-reused path."""
        seq = self._next_seq
        self._next_seq += 1
        element = StreamElement(path=f"/{seq}", graph=g, seq=seq, arrival=arrival)
        self.elements.append(element)
        if self.windows and not any(
            timestamp_extract(g, w.content_timestamp_relation) for w in self.windows
        ):
            log.warning(
                "element %s%s carries no timestamp under any window's timestamp relation",
                self.base.value,
                element.path,
            )
        return element

    def element(self, path: str) -> Optional[StreamElement]:
        for e in self.elements:
            if e.path == path:
                return e
        return None

    def delete(self, path: str) -> bool:
        for i, e in enumerate(self.elements):
            if e.path == path:
                del self.elements[i]
                return True
        return False

    def update_windows(self, put_body: Graph) -> tuple[WindowSpec, ...]:
        """Replace the window set with the specs described in a PUT body.

        Containment and membership triples in the body are ignored
        (server-managed). Raises WindowSpecError on a missing or
        multi-valued required property, on a window carrying both a
        logical and a physical size, and on duplicate membership
        resources.
        """
        specs = extract_window_specs(put_body, self.base)
        self.windows = specs
        return specs

    def apply_retention(self, now: Timestamp) -> list[str]:
        """Drop elements at or past the retention horizon; returns their paths."""
        if self.retention is None:
            return []
        horizon = now - self.retention
        removed = [e.path for e in self.elements if _retention_key(e, self.windows) <= horizon]
        if removed:
            doomed = set(removed)
            self.elements = [e for e in self.elements if e.path not in doomed]
        return removed

    def snapshot(self) -> "ContainerSnapshot":
        return ContainerSnapshot(self.base, tuple(self.elements), self.windows)


@dataclass(frozen=True, slots=True)
class ContainerSnapshot:
    """Immutable view for evaluation; shares the state's field layout."""

    base: IRI
    elements: tuple[StreamElement, ...]
    windows: tuple[WindowSpec, ...]


ContainerLike = Union[StreamContainerState, ContainerSnapshot]


def _retention_key(e: StreamElement, windows: Sequence[WindowSpec]) -> Timestamp:
    stamps: set[Timestamp] = set()
    for w in windows:
        stamps |= timestamp_extract(e.graph, w.content_timestamp_relation)
    return max(stamps) if stamps else e.arrival


def eval_logical_window(state: ContainerLike, w: WindowSpec, t_eval: Timestamp) -> MemberSet:
    """Members carry a timestamp in (t_eval - alpha, t_eval]."""
    assert isinstance(w.kind, LogicalWindow)
    open_ = t_eval - w.kind.alpha
    members = tuple(
        e
        for e in state.elements
        if any(open_ < t <= t_eval for t in timestamp_extract(e.graph, w.content_timestamp_relation))
    )
    return MemberSet(window=w.membership_resource, members=members, t_eval=t_eval)


def eval_physical_window(state: ContainerLike, w: WindowSpec) -> MemberSet:
    """The n timestamped elements with the greatest maximum timestamp.

    Ties are broken toward the higher seq (most recently inserted);
    untimestamped elements never qualify.
    """
    assert isinstance(w.kind, PhysicalWindow)
    keyed = []
    for e in state.elements:
        stamps = timestamp_extract(e.graph, w.content_timestamp_relation)
        if stamps:
            keyed.append(((max(stamps), e.seq), e))
    keyed.sort(key=lambda pair: pair[0], reverse=True)
    members = tuple(sorted((e for _, e in keyed[: w.kind.count]), key=lambda e: e.seq))
    return MemberSet(window=w.membership_resource, members=members)


def eval_window(state: ContainerLike, w: WindowSpec, t_eval: Timestamp) -> MemberSet:
    if isinstance(w.kind, LogicalWindow):
        return eval_logical_window(state, w, t_eval)
    return eval_physical_window(state, w)


def materialize_membership(state: ContainerLike, t_eval: Timestamp) -> Graph:
    """One (membershipResource, memberRelation, element) triple per member."""
    triples = []
    for w in state.windows:
        member_set = eval_window(state, w, t_eval)
        for e in member_set.members:
            triples.append(Triple(w.membership_resource, w.member_relation, e.iri(state.base)))
    return Graph(triples)


def container_representation(state: ContainerLike, t_eval: Timestamp) -> Graph:
    """The full GET body: type, containment, window specs, membership."""
    triples = [Triple(state.base, RDF.type, LDPSC.StreamContainer)]
    for e in state.elements:
        triples.append(Triple(state.base, LDP.contains, e.iri(state.base)))
    for i, w in enumerate(state.windows):
        node = BlankNode(f"w{i}")
        triples.append(Triple(state.base, LDPSC.window, node))
        triples.append(Triple(node, LDP.hasMemberRelation, w.member_relation))
        triples.append(Triple(node, LDP.membershipResource, w.membership_resource))
        triples.append(Triple(node, LDPSC.contentTimestampRelation, w.content_timestamp_relation))
        if isinstance(w.kind, LogicalWindow):
            triples.append(
                Triple(node, LDPSC.logical, Literal(w.kind.alpha.isoformat(), XSD.duration))
            )
        else:
            triples.append(
                Triple(node, LDPSC.physical, Literal(str(w.kind.count), XSD.integer))
            )
    return Graph(triples).union(materialize_membership(state, t_eval))


def extract_window_specs(body: Graph, base: IRI) -> tuple[WindowSpec, ...]:
    """Read window specs from a container document.

    Window nodes are the objects of (base, ldpsc:window, ?w); each needs
    ldp:hasMemberRelation, ldp:membershipResource,
    ldpsc:contentTimestampRelation and exactly one of ldpsc:logical /
    ldpsc:physical.
    """
    specs = []
    nodes = sorted(body.objects(subject=base, predicate=LDPSC.window), key=str)
    for node in nodes:
        if isinstance(node, Literal):
            raise WindowSpecError(f"window must be a resource, got literal {node.lexical!r}")
        member_relation = _required_iri(body, node, LDP.hasMemberRelation)
        membership_resource = _required_iri(body, node, LDP.membershipResource)
        ts_relation = _required_iri(body, node, LDPSC.contentTimestampRelation)
        logical = list(body.objects(subject=node, predicate=LDPSC.logical))
        physical = list(body.objects(subject=node, predicate=LDPSC.physical))
        if logical and physical:
            raise WindowSpecError(
                f"window {node} carries both ldpsc:logical and ldpsc:physical"
            )
        if not logical and not physical:
            raise WindowSpecError(
                f"window {node} is missing a size (ldpsc:logical or ldpsc:physical)"
            )
        if len(logical) + len(physical) > 1:
            raise WindowSpecError(f"window {node} carries more than one size")
        if logical:
            kind = LogicalWindow(_parse_logical(logical[0]))
        else:
            kind = PhysicalWindow(_parse_physical(physical[0]))
        specs.append(
            WindowSpec(
                member_relation=member_relation,
                membership_resource=membership_resource,
                content_timestamp_relation=ts_relation,
                kind=kind,
            )
        )
    seen_resources = [s.membership_resource for s in specs]
    if len(set(seen_resources)) != len(seen_resources):
        raise WindowSpecError("duplicate ldp:membershipResource across windows")
    return tuple(specs)


def _required_iri(body: Graph, node, prop: IRI) -> IRI:
    values = list(body.objects(subject=node, predicate=prop))
    if not values:
        raise WindowSpecError(f"window {node} is missing required property {prop.value}")
    if len(values) > 1:
        raise WindowSpecError(f"window {node} has multiple values for {prop.value}")
    value = values[0]
    if not isinstance(value, IRI):
        raise WindowSpecError(f"window property {prop.value} must be an IRI, got {value}")
    return value


def _parse_logical(value) -> Duration:
    if not isinstance(value, Literal):
        raise WindowSpecError(f"ldpsc:logical must be a duration literal, got {value}")
    try:
        alpha = parse_duration(value.lexical)
    except DurationError as exc:
        raise WindowSpecError(f"bad ldpsc:logical value {value.lexical!r}: {exc}") from None
    if alpha.ms <= 0:
        raise WindowSpecError(f"ldpsc:logical must be positive, got {value.lexical!r}")
    return alpha


def _parse_physical(value) -> int:
    if not isinstance(value, Literal):
        raise WindowSpecError(f"ldpsc:physical must be an integer literal, got {value}")
    try:
        n = int(value.lexical)
    except ValueError:
        raise WindowSpecError(f"bad ldpsc:physical value {value.lexical!r}") from None
    if n < 1:
        raise WindowSpecError(f"ldpsc:physical must be >= 1, got {n}")
    return n


# ---------------------------------------------------------------------------
# state dump/load as Turtle files, for fixtures (no runtime persistence)


def dump_state(state: ContainerLike, directory) -> None:
    """Write a container's windows and elements as Turtle files.

    Layout: container.ttl (window specs), elements.txt (seq + arrival
    per line), e<seq>.ttl per element graph.
    """
    from pathlib import Path

    from .rdf.turtle import serialize_turtle

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    spec_graph = Graph(
        t
        for t in container_representation(
            ContainerSnapshot(state.base, (), state.windows), _ANY_INSTANT
        )
    )
    (directory / "container.ttl").write_text(
        serialize_turtle(spec_graph, base=state.base.value), encoding="utf-8"
    )
    lines = []
    for e in state.elements:
        lines.append(f"{e.seq} {e.arrival.isoformat()}")
        (directory / f"e{e.seq}.ttl").write_text(
            serialize_turtle(e.graph, base=state.base.value), encoding="utf-8"
        )
    (directory / "elements.txt").write_text("\n".join(lines) + ("\n" if lines else ""), "utf-8")


def load_state(directory, base: IRI, retention: Optional[Duration] = None) -> StreamContainerState:
    """Rebuild a container state written by dump_state."""
    from pathlib import Path

    from .rdf.turtle import parse_turtle

    directory = Path(directory)
    spec_graph = parse_turtle((directory / "container.ttl").read_text("utf-8"), base.value)
    state = StreamContainerState(base, windows=extract_window_specs(spec_graph, base), retention=retention)
    index = (directory / "elements.txt").read_text("utf-8")
    for line in index.splitlines():
        if not line.strip():
            continue
        seq_text, _, arrival_text = line.partition(" ")
        seq = int(seq_text)
        graph = parse_turtle((directory / f"e{seq}.ttl").read_text("utf-8"), base.value)
        element = StreamElement(
            path=f"/{seq}", graph=graph, seq=seq, arrival=parse_timestamp(arrival_text)
        )
        state.elements.append(element)
        state._next_seq = max(state._next_seq, seq + 1)
    return state


_ANY_INSTANT = parse_timestamp("1970-01-01T00:00:00.000Z")
