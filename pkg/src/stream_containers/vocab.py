"""Vocabulary namespaces used on the wire."""

from .rdf.terms import IRI


class Namespace:
    """Attribute access mints term IRIs: LDP.contains -> IRI(...#contains)."""

    def __init__(self, base: str):
        self._base = base

    @property
    def base(self) -> str:
        return self._base

    def __getattr__(self, name: str) -> IRI:
        if name.startswith("_"):
            raise AttributeError(name)
        return IRI(self._base + name)

    def __getitem__(self, name: str) -> IRI:
        return IRI(self._base + name)

    def __repr__(self) -> str:
        return f"Namespace({self._base!r})"


RDF = Namespace("http://www.w3.org/1999/02/22-rdf-syntax-ns#")
XSD = Namespace("http://www.w3.org/2001/XMLSchema#")
LDP = Namespace("http://www.w3.org/ns/ldp#")
LDPSC = Namespace("https://solid.ti.rw.fau.de/public/ns/stream-containers#")
SOSA = Namespace("http://www.w3.org/ns/sosa/")
EX = Namespace("http://example.org/")

PREFERRED_PREFIXES = {
    "rdf": RDF.base,
    "xsd": XSD.base,
    "ldp": LDP.base,
    "ldpsc": LDPSC.base,
    "sosa": SOSA.base,
    "ex": EX.base,
}
