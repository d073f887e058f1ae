"""Minimal RDF data model: terms, graphs, Turtle subset, temporal values."""

from .isomorphism import isomorphic
from .temporal import Duration, Timestamp, parse_duration, parse_timestamp, shift
from .terms import (
    BlankNode,
    EMPTY_GRAPH,
    Graph,
    IRI,
    Literal,
    Term,
    Triple,
    graph_difference,
    graph_union,
)
from .turtle import parse_turtle, serialize_turtle

__all__ = [
    "BlankNode",
    "Duration",
    "EMPTY_GRAPH",
    "Graph",
    "IRI",
    "Literal",
    "Term",
    "Timestamp",
    "Triple",
    "graph_difference",
    "graph_union",
    "isomorphic",
    "parse_duration",
    "parse_timestamp",
    "parse_turtle",
    "serialize_turtle",
    "shift",
]
