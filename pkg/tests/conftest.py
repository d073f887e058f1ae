"""Shared fixtures and generators for the suite."""

from __future__ import annotations

import random

import pytest

from stream_containers import (
    BlankNode,
    Graph,
    IRI,
    Literal,
    ServerConfig,
    StreamContainerServer,
    Triple,
    parse_timestamp,
)
from stream_containers.vocab import EX, SOSA, XSD

T0 = parse_timestamp("2021-07-20T10:00:00.000Z")

FIGURE_CONTAINER_DOC = """\
@prefix ldpsc: <https://solid.ti.rw.fau.de/public/ns/stream-containers#> .
@prefix ldp: <http://www.w3.org/ns/ldp#> .
@prefix sosa: <http://www.w3.org/ns/sosa/> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
@prefix ex: <http://example.org/> .

<> a ldpsc:StreamContainer ;
    ldp:contains </0> ,
                 </1> ,
                 </2> ,
                 </3> ;
    ldpsc:window [
        ldp:hasMemberRelation ex:inWindow ;
        ldp:membershipResource <#window1> ;
        ldpsc:contentTimestampRelation sosa:resultTime ;
        ldpsc:logical "PT2M"^^xsd:duration
    ] .

<#window1> ex:inWindow </2> ,
                       </3> .
"""

FIGURE_RESOURCE_DOC = """\
@prefix sosa: <http://www.w3.org/ns/sosa/> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
@prefix ex: <http://example.org/> .

</3> a sosa:Observation ;
    sosa:observedProperty ex:temperature ;
    sosa:hasSimpleResult 22.3 ;
    sosa:resultTime "2021-07-20T10:51:08.657Z"^^xsd:dateTimeStamp .
"""


def observation(subject: str, stamp=None, value="22.3") -> Graph:
    """A small sensor observation graph, optionally timestamped."""
    s = IRI(subject)
    triples = [
        Triple(s, SOSA.observedProperty, EX.temperature),
        Triple(s, SOSA.hasSimpleResult, Literal(value, XSD.decimal)),
    ]
    if stamp is not None:
        triples.append(Triple(s, SOSA.resultTime, Literal(stamp.isoformat(), XSD.dateTimeStamp)))
    return Graph(triples)


_IRI_POOL = [
    "http://t.example/a",
    "http://t.example/b",
    "http://t.example/dir/c",
    "http://t.example/d#frag",
    "https://other.example/x",
    "urn:thing:1",
    str(EX.temperature),
    str(SOSA.resultTime),
]

_NASTY_STRINGS = [
    "plain",
    'quo"te',
    "back\\slash",
    "new\nline",
    "tab\there",
    "ünïcödé ♜",
    "trailing space ",
    "",
    "# not a comment",
]


def random_term(rng: random.Random, allow_literal: bool = True):
    roll = rng.random()
    if roll < 0.45:
        return IRI(rng.choice(_IRI_POOL))
    if roll < 0.6 or not allow_literal:
        return BlankNode(rng.choice(["x", "y", "z", "n0", "n1"]))
    kind = rng.random()
    if kind < 0.35:
        return Literal(rng.choice(_NASTY_STRINGS))
    if kind < 0.5:
        return Literal(str(rng.randint(-900, 900)), XSD.integer)
    if kind < 0.65:
        return Literal(f"{rng.randint(-50, 50)}.{rng.randint(0, 99):02d}", XSD.decimal)
    if kind < 0.8:
        return Literal(rng.choice(_NASTY_STRINGS), lang=rng.choice(["en", "de", "en-GB"]))
    if kind < 0.9:
        return Literal("2021-07-20T10:51:08.657Z", XSD.dateTimeStamp)
    return Literal(rng.choice(_NASTY_STRINGS), IRI("http://t.example/dt"))


def random_graph(rng: random.Random, max_triples: int = 20) -> Graph:
    triples = []
    for _ in range(rng.randint(0, max_triples)):
        subject = random_term(rng, allow_literal=False)
        predicate = IRI(rng.choice(_IRI_POOL))
        triples.append(Triple(subject, predicate, random_term(rng)))
    return Graph(triples)


@pytest.fixture
def http_server():
    """A real socket server with two containers, torn down after the test."""
    config = ServerConfig(port=0, containers=["/tempstream", "/agg"])
    server = StreamContainerServer(config)
    server.start()
    try:
        yield server
    finally:
        server.shutdown()


# ---------------------------------------------------------------------------
# acceptance reporting: one visible line per criterion at the end of a run

_ACCEPTANCE_RESULTS: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    if "test_acceptance.py" not in str(report.nodeid):
        return
    name = report.nodeid.split("::")[-1]
    _ACCEPTANCE_RESULTS[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name in sorted(_ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"{_ACCEPTANCE_RESULTS[name]}  {name}")
