"""Resource-oriented RDF stream processing.

A stream container is a web container representing one RDF stream: POST
appends stream elements, GET evaluates the container's windows at
request-arrival time and returns membership triples alongside the
containment list. Processing happens in pull-based clients that poll a
window on a schedule, transform the member graphs, and emit results to
downstream containers. A reference semantics module replays the whole
pipeline against classical sliding-window sequences.
"""

__version__ = "0.1.0"

from .clock import Clock, ManualClock, RealClock
from .client import (
    CycleRecord,
    MergePolicy,
    PollSchedule,
    StreamOperatorKind,
    WindowSnapshot,
    average_simple_result,
    derive,
    emit,
    fetch_window,
    identity_transform,
    run_polling,
    standardize_apart,
    transform,
)
from .core import (
    ContainerSnapshot,
    LogicalWindow,
    MemberSet,
    PhysicalWindow,
    StreamContainerState,
    StreamElement,
    WindowSpec,
    container_representation,
    element_iri,
    eval_logical_window,
    eval_physical_window,
    eval_window,
    extract_window_specs,
    materialize_membership,
    timestamp_extract,
)
from .errors import (
    DurationError,
    EmitError,
    FetchError,
    StreamContainersError,
    TimestampError,
    TimestampRangeError,
    TransportError,
    TurtleParseError,
    WindowSpecError,
)
from .oracle import (
    CycleDivergence,
    EquivalenceReport,
    InstantWindow,
    SlidingWindowSpec,
    StreamEntry,
    TupleStream,
    check_equivalence,
    instant_window,
    sliding_window_sequence,
    to_tuple_stream,
)
from .rdf import (
    BlankNode,
    Duration,
    Graph,
    IRI,
    Literal,
    Timestamp,
    Triple,
    graph_difference,
    graph_union,
    isomorphic,
    parse_duration,
    parse_timestamp,
    parse_turtle,
    serialize_turtle,
    shift,
)
from .server import ContainerService, ServerConfig, StreamContainerServer
from .sim import (
    Scenario,
    ScenarioElement,
    SimClock,
    SimTransport,
    SimulatedEnvironment,
    parse_scenario_file,
    random_scenario,
    run_scenario,
    simulated_environment,
)
from .transport import HttpRequest, HttpResponse, RealTransport, Transport, TransportResult
from .vocab import EX, LDP, LDPSC, RDF, SOSA, XSD, Namespace
