"""RDF terms, triples and graphs.

All values are immutable and hashable; graphs follow set semantics, so
adding a duplicate triple is a no-op.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Union

XSD_STRING = "http://www.w3.org/2001/XMLSchema#string"
RDF_LANG_STRING = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString"


@dataclass(frozen=True, slots=True, order=True)
class IRI:
    value: str

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, slots=True, order=True)
class BlankNode:
    label: str

    def __str__(self) -> str:
        return "_:" + self.label


@dataclass(frozen=True, slots=True)
class Literal:
    lexical: str
    datatype: IRI = field(default=IRI(XSD_STRING))
    lang: Optional[str] = None

    def __post_init__(self):
        if self.lang is not None:
            object.__setattr__(self, "datatype", IRI(RDF_LANG_STRING))

    def __str__(self) -> str:
        if self.lang is not None:
            return f'"{self.lexical}"@{self.lang}'
        if self.datatype.value == XSD_STRING:
            return f'"{self.lexical}"'
        return f'"{self.lexical}"^^<{self.datatype.value}>'


Term = Union[IRI, BlankNode, Literal]
SubjectTerm = Union[IRI, BlankNode]


@dataclass(frozen=True, slots=True)
class Triple:
    subject: SubjectTerm
    predicate: IRI
    object: Term

    def __post_init__(self):
        if not isinstance(self.subject, (IRI, BlankNode)):
            raise TypeError(f"triple subject must be an IRI or blank node, got {self.subject!r}")
        if not isinstance(self.predicate, IRI):
            raise TypeError(f"triple predicate must be an IRI, got {self.predicate!r}")
        if not isinstance(self.object, (IRI, BlankNode, Literal)):
            raise TypeError(f"triple object must be an RDF term, got {self.object!r}")

    def __iter__(self) -> Iterator[Term]:
        return iter((self.subject, self.predicate, self.object))


class Graph:
    """A finite set of triples."""

    __slots__ = ("_triples",)

    def __init__(self, triples: Iterable[Triple] = ()):
        self._triples = frozenset(triples)

    @property
    def triples(self) -> frozenset[Triple]:
        return self._triples

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._triples)

    def __len__(self) -> int:
        return len(self._triples)

    def __contains__(self, triple: Triple) -> bool:
        return triple in self._triples

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self._triples == other._triples

    def __hash__(self) -> int:
        return hash(self._triples)

    def __repr__(self) -> str:
        return f"Graph(<{len(self._triples)} triples>)"

    def union(self, other: "Graph") -> "Graph":
        return Graph(self._triples | other._triples)

    def difference(self, other: "Graph") -> "Graph":
        return Graph(self._triples - other._triples)

    def match(
        self,
        subject: Optional[SubjectTerm] = None,
        predicate: Optional[IRI] = None,
        object: Optional[Term] = None,
    ) -> Iterator[Triple]:
        """Iterate triples matching the given components; None is a wildcard."""
        for t in self._triples:
            if subject is not None and t.subject != subject:
                continue
            if predicate is not None and t.predicate != predicate:
                continue
            if object is not None and t.object != object:
                continue
            yield t

    def objects(self, subject: Optional[SubjectTerm] = None, predicate: Optional[IRI] = None) -> Iterator[Term]:
        for t in self.match(subject, predicate):
            yield t.object

    def subjects(self, predicate: Optional[IRI] = None, object: Optional[Term] = None) -> Iterator[SubjectTerm]:
        for t in self.match(None, predicate, object):
            yield t.subject

    def blank_nodes(self) -> set[BlankNode]:
        nodes: set[BlankNode] = set()
        for t in self._triples:
            if isinstance(t.subject, BlankNode):
                nodes.add(t.subject)
            if isinstance(t.object, BlankNode):
                nodes.add(t.object)
        return nodes


EMPTY_GRAPH = Graph()


def graph_union(a: Graph, b: Graph) -> Graph:
    return a.union(b)


def graph_difference(a: Graph, b: Graph) -> Graph:
    return a.difference(b)
