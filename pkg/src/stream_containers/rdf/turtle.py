"""Turtle subset parser and serializer.

Supported syntax: @prefix, relative IRI resolution against a caller
base, ``a`` for rdf:type, object lists (","), predicate lists (";"),
blank-node property lists ("[ ]"), typed/plain/language-tagged string
literals, and bare integer/decimal literals. Collections and quoted
triples are rejected. The serializer output always re-parses to an
isomorphic graph and is deterministic for a given graph and base.
"""

from __future__ import annotations

import re
from typing import Optional
from urllib.parse import urljoin, urlsplit

from ..errors import TurtleParseError
from ..vocab import PREFERRED_PREFIXES, RDF, XSD
from .terms import BlankNode, Graph, IRI, Literal, Term, Triple

_SCHEME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")

_PN_LOCAL = r"[A-Za-z0-9_](?:[A-Za-z0-9_\-]|\.(?=[A-Za-z0-9_\-.]))*"

_TOKEN_RE = re.compile(
    r"""
      (?P<PREFIX_DIR>@prefix\b)
    | (?P<BASE_DIR>@base\b)
    | (?P<IRIREF><[^<>"{}|^`\\\x00-\x20]*>)
    | (?P<STRING>"(?:[^"\\\n\r]|\\.)*")
    | (?P<BLANK>_:%(local)s)
    | (?P<PNAME>(?:[A-Za-z][A-Za-z0-9_\-]*)?:(?:%(local)s)?)
    | (?P<KW_A>a(?![A-Za-z0-9_:\-]))
    | (?P<DECIMAL>[+-]?[0-9]+\.[0-9]+)
    | (?P<INTEGER>[+-]?[0-9]+)
    | (?P<LANGTAG>@[A-Za-z]+(?:-[A-Za-z0-9]+)*)
    | (?P<CARETS>\^\^)
    | (?P<PUNCT>[.;,\[\]()])
    """ % {"local": _PN_LOCAL},
    re.VERBOSE,
)

_WS_RE = re.compile(r"(?:[ \t\r\n]+|#[^\n]*)+")

_STRING_ESCAPES = {
    "t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f",
    '"': '"', "'": "'", "\\": "\\",
}


class _Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    line = 1
    line_start = 0
    n = len(text)
    while pos < n:
        ws = _WS_RE.match(text, pos)
        if ws:
            chunk = ws.group()
            newlines = chunk.count("\n")
            if newlines:
                line += newlines
                line_start = ws.start() + chunk.rfind("\n") + 1
            pos = ws.end()
            continue
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise TurtleParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        tokens.append(_Token(m.lastgroup, m.group(), line, m.start() - line_start + 1))
        pos = m.end()
    return tokens


def _unescape(raw: str, line: int, col: int) -> str:
    out = []
    i = 0
    n = len(raw)
    while i < n:
        ch = raw[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        if i + 1 >= n:
            raise TurtleParseError("dangling escape", line, col)
        esc = raw[i + 1]
        if esc in _STRING_ESCAPES:
            out.append(_STRING_ESCAPES[esc])
            i += 2
        elif esc in ("u", "U"):
            width = 4 if esc == "u" else 8
            hexdigits = raw[i + 2 : i + 2 + width]
            if len(hexdigits) != width or not re.fullmatch(r"[0-9A-Fa-f]+", hexdigits):
                raise TurtleParseError(f"bad unicode escape \\{esc}{hexdigits}", line, col)
            out.append(chr(int(hexdigits, 16)))
            i += 2 + width
        else:
            raise TurtleParseError(f"unknown escape \\{esc}", line, col)
    return "".join(out)


class _Parser:
    def __init__(self, tokens: list[_Token], base: str):
        self.tokens = tokens
        self.pos = 0
        self.base = base
        self.prefixes: dict[str, str] = {}
        self.triples: list[Triple] = []
        taken = {t.text[2:] for t in tokens if t.kind == "BLANK"}
        self._fresh_labels = (f"b{i}" for i in _skipping_counter(taken))

    # token plumbing

    def _peek(self) -> Optional[_Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _next(self, expect: str) -> _Token:
        tok = self._peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else None
            raise TurtleParseError(
                f"unexpected end of document, expected {expect}",
                last.line if last else 1,
                last.col if last else 1,
            )
        self.pos += 1
        return tok

    def _expect_punct(self, char: str):
        tok = self._next(repr(char))
        if tok.kind != "PUNCT" or tok.text != char:
            raise TurtleParseError(f"expected {char!r}, found {tok.text!r}", tok.line, tok.col)

    def _error(self, message: str, tok: _Token):
        raise TurtleParseError(message, tok.line, tok.col)

    # grammar

    def parse(self) -> Graph:
        while self._peek() is not None:
            tok = self._peek()
            if tok.kind == "PREFIX_DIR":
                self._parse_prefix()
            elif tok.kind == "BASE_DIR":
                self._error("@base is not supported; pass the base IRI to the parser", tok)
            else:
                self._parse_triples()
                self._expect_punct(".")
        return Graph(self.triples)

    def _parse_prefix(self):
        self.pos += 1
        name_tok = self._next("prefix name")
        if name_tok.kind != "PNAME" or not name_tok.text.endswith(":"):
            self._error(f"expected a prefix name ending in ':', found {name_tok.text!r}", name_tok)
        iri_tok = self._next("IRI")
        if iri_tok.kind != "IRIREF":
            self._error(f"expected an IRI after @prefix, found {iri_tok.text!r}", iri_tok)
        self._expect_punct(".")
        self.prefixes[name_tok.text[:-1]] = self._resolve_iriref(iri_tok)

    def _parse_triples(self):
        tok = self._peek()
        if tok.kind == "PUNCT" and tok.text == "[":
            subject = self._parse_bnode_property_list()
            nxt = self._peek()
            if nxt is not None and not (nxt.kind == "PUNCT" and nxt.text == "."):
                self._parse_predicate_object_list(subject)
        else:
            subject = self._parse_subject()
            self._parse_predicate_object_list(subject)

    def _parse_subject(self):
        tok = self._next("subject")
        if tok.kind == "IRIREF":
            return IRI(self._resolve_iriref(tok))
        if tok.kind == "PNAME":
            return self._expand_pname(tok)
        if tok.kind == "BLANK":
            return BlankNode(tok.text[2:])
        self._error(f"expected a subject, found {tok.text!r}", tok)

    def _parse_predicate_object_list(self, subject):
        while True:
            verb = self._parse_verb()
            while True:
                obj = self._parse_object()
                self.triples.append(Triple(subject, verb, obj))
                tok = self._peek()
                if tok is not None and tok.kind == "PUNCT" and tok.text == ",":
                    self.pos += 1
                    continue
                break
            tok = self._peek()
            if tok is not None and tok.kind == "PUNCT" and tok.text == ";":
                self.pos += 1
                # trailing ';' before '.' or ']' is legal
                nxt = self._peek()
                if nxt is not None and nxt.kind == "PUNCT" and nxt.text in (".", "]"):
                    return
                while nxt is not None and nxt.kind == "PUNCT" and nxt.text == ";":
                    self.pos += 1
                    nxt = self._peek()
                continue
            return

    def _parse_verb(self) -> IRI:
        tok = self._next("predicate")
        if tok.kind == "KW_A":
            return RDF.type
        if tok.kind == "IRIREF":
            return IRI(self._resolve_iriref(tok))
        if tok.kind == "PNAME":
            return self._expand_pname(tok)
        self._error(f"expected a predicate, found {tok.text!r}", tok)

    def _parse_object(self) -> Term:
        tok = self._next("object")
        if tok.kind == "IRIREF":
            return IRI(self._resolve_iriref(tok))
        if tok.kind == "PNAME":
            return self._expand_pname(tok)
        if tok.kind == "BLANK":
            return BlankNode(tok.text[2:])
        if tok.kind == "PUNCT" and tok.text == "[":
            self.pos -= 1
            tok2 = self._peek()
            self.pos += 1
            return self._parse_bnode_property_list_at(tok2)
        if tok.kind == "STRING":
            return self._parse_literal(tok)
        if tok.kind == "INTEGER":
            return Literal(tok.text, XSD.integer)
        if tok.kind == "DECIMAL":
            return Literal(tok.text, XSD.decimal)
        if tok.kind == "PUNCT" and tok.text == "(":
            self._error("collections are not supported", tok)
        self._error(f"expected an object, found {tok.text!r}", tok)

    def _parse_bnode_property_list(self) -> BlankNode:
        tok = self._next("'['")
        return self._parse_bnode_property_list_at(tok)

    def _parse_bnode_property_list_at(self, open_tok: _Token) -> BlankNode:
        node = BlankNode(next(self._fresh_labels))
        tok = self._peek()
        if tok is None:
            self._error("unterminated blank node property list", open_tok)
        if not (tok.kind == "PUNCT" and tok.text == "]"):
            self._parse_predicate_object_list(node)
        self._expect_punct("]")
        return node

    def _parse_literal(self, tok: _Token) -> Literal:
        value = _unescape(tok.text[1:-1], tok.line, tok.col)
        nxt = self._peek()
        if nxt is not None and nxt.kind == "CARETS":
            self.pos += 1
            dt_tok = self._next("datatype IRI")
            if dt_tok.kind == "IRIREF":
                datatype = IRI(self._resolve_iriref(dt_tok))
            elif dt_tok.kind == "PNAME":
                datatype = self._expand_pname(dt_tok)
            else:
                self._error(f"expected a datatype IRI, found {dt_tok.text!r}", dt_tok)
            return Literal(value, datatype)
        if nxt is not None and nxt.kind == "LANGTAG":
            self.pos += 1
            return Literal(value, lang=nxt.text[1:])
        return Literal(value)

    # term helpers

    def _resolve_iriref(self, tok: _Token) -> str:
        ref = _unescape(tok.text[1:-1], tok.line, tok.col)
        if _SCHEME_RE.match(ref):
            return ref
        resolved = urljoin(self.base, ref) if ref else self.base
        # urljoin drops an empty fragment; "<#>"-style refs must keep it
        if ref.endswith("#") and not resolved.endswith("#"):
            resolved += "#"
        if not _SCHEME_RE.match(resolved):
            self._error(f"IRI did not resolve to an absolute form: {ref!r}", tok)
        return resolved

    def _expand_pname(self, tok: _Token) -> IRI:
        prefix, _, local = tok.text.partition(":")
        if prefix not in self.prefixes:
            self._error(f"undefined prefix {prefix + ':'!r}", tok)
        return IRI(self.prefixes[prefix] + local)


def _skipping_counter(taken: set[str]):
    i = 0
    while True:
        if f"b{i}" not in taken:
            yield i
        i += 1


def parse_turtle(text: str, base: str) -> Graph:
    """Parse a Turtle document, resolving relative IRIs against ``base``.

    Blank node labels are local to one parse. Raises TurtleParseError
    with line/column on syntax errors, undefined prefixes and IRIs that
    do not resolve to an absolute form.
    """
    if not _SCHEME_RE.match(base):
        raise TurtleParseError(f"base IRI must be absolute: {base!r}", 0, 0)
    return _Parser(_tokenize(text), base).parse()


# ---------------------------------------------------------------------------
# serializer

_ESCAPE_OUT = {
    "\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t",
    "\b": "\\b", "\f": "\\f",
}

_INTEGER_LEX = re.compile(r"[+-]?[0-9]+")
_DECIMAL_LEX = re.compile(r"[+-]?[0-9]+\.[0-9]+")
_LABEL_LEX = re.compile(_PN_LOCAL)
_LOCAL_LEX = re.compile(f"(?:{_PN_LOCAL})?")


def _escape_string(value: str) -> str:
    out = []
    for ch in value:
        if ch in _ESCAPE_OUT:
            out.append(_ESCAPE_OUT[ch])
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


class _Serializer:
    def __init__(self, graph: Graph, base: Optional[str], prefixes: dict[str, str]):
        self.graph = graph
        self.base = base
        self.origin = None
        if base:
            parts = urlsplit(base)
            if parts.scheme and parts.netloc:
                self.origin = f"{parts.scheme}://{parts.netloc}"
        self.prefixes = prefixes
        self.used_prefixes: set[str] = set()
        self.labels = self._relabel()
        self.inline = self._inlineable()

    def _relabel(self) -> dict[BlankNode, str]:
        nodes = sorted(self.graph.blank_nodes(), key=lambda n: n.label)
        labels = {}
        taken = {n.label for n in nodes if _LABEL_LEX.fullmatch(n.label)}
        fresh = _skipping_counter(taken)
        for node in nodes:
            if _LABEL_LEX.fullmatch(node.label):
                labels[node] = node.label
            else:
                labels[node] = f"b{next(fresh)}"
        return labels

    def _inlineable(self) -> set[BlankNode]:
        """Blank nodes referenced exactly once as an object, acyclically."""
        as_object: dict[BlankNode, int] = {}
        for t in self.graph:
            if isinstance(t.object, BlankNode):
                as_object[t.object] = as_object.get(t.object, 0) + 1
        candidates = {n for n, count in as_object.items() if count == 1}

        def reaches(node: BlankNode, target: BlankNode, seen: set) -> bool:
            if node in seen:
                return False
            seen.add(node)
            for t in self.graph.match(subject=node):
                if isinstance(t.object, BlankNode):
                    if t.object == target or reaches(t.object, target, seen):
                        return True
            return False

        return {n for n in candidates if not reaches(n, n, set())}

    # term rendering

    def render_iri(self, iri: IRI) -> str:
        value = iri.value
        for prefix, ns in self.prefixes.items():
            if value.startswith(ns):
                local = value[len(ns):]
                if _LOCAL_LEX.fullmatch(local):
                    self.used_prefixes.add(prefix)
                    return f"{prefix}:{local}"
        if self.base:
            if value == self.base:
                return "<>"
            if value.startswith(self.base + "#"):
                return f"<#{value[len(self.base) + 1:]}>"
            if self.origin and value.startswith(self.origin):
                rest = value[len(self.origin):]
                if rest.startswith("/"):
                    return f"<{rest}>"
        return f"<{value}>"

    def render_literal(self, lit: Literal) -> str:
        if lit.lang is not None:
            return f'"{_escape_string(lit.lexical)}"@{lit.lang}'
        dt = lit.datatype.value
        if dt == XSD.integer.value and _INTEGER_LEX.fullmatch(lit.lexical):
            return lit.lexical
        if dt == XSD.decimal.value and _DECIMAL_LEX.fullmatch(lit.lexical):
            return lit.lexical
        if dt == "http://www.w3.org/2001/XMLSchema#string":
            return f'"{_escape_string(lit.lexical)}"'
        return f'"{_escape_string(lit.lexical)}"^^{self.render_iri(lit.datatype)}'

    def render_object(self, term: Term, indent: int) -> str:
        if isinstance(term, BlankNode) and term in self.inline:
            return self.render_bnode_block(term, indent)
        if isinstance(term, IRI):
            return self.render_iri(term)
        if isinstance(term, BlankNode):
            return "_:" + self.labels[term]
        return self.render_literal(term)

    def render_bnode_block(self, node: BlankNode, indent: int) -> str:
        triples = list(self.graph.match(subject=node))
        if not triples:
            return "[]"
        inner = self.render_po_list(triples, indent + 4)
        return "[\n" + " " * (indent + 4) + inner + "\n" + " " * indent + "]"

    def render_po_list(self, triples: list[Triple], indent: int) -> str:
        groups: dict[IRI, list[Term]] = {}
        for t in triples:
            groups.setdefault(t.predicate, []).append(t.object)

        def pred_key(pred: IRI):
            return (pred != RDF.type, pred.value)

        parts = []
        for pred in sorted(groups, key=pred_key):
            pred_str = "a" if pred == RDF.type else self.render_iri(pred)
            rendered = sorted(
                (self._object_sort_key(o), self.render_object(o, indent)) for o in groups[pred]
            )
            joiner = " ,\n" + " " * (indent + 4)
            parts.append(pred_str + " " + joiner.join(r for _, r in rendered))
        return (" ;\n" + " " * indent).join(parts)

    def _object_sort_key(self, term: Term):
        if isinstance(term, IRI):
            return (0, term.value)
        if isinstance(term, BlankNode):
            return (1, self.labels[term])
        return (2, term.datatype.value, term.lang or "", term.lexical)

    def serialize(self) -> str:
        top_subjects = []
        seen = set()
        for t in self.graph:
            subj = t.subject
            if subj in seen:
                continue
            seen.add(subj)
            if isinstance(subj, BlankNode) and subj in self.inline:
                continue
            top_subjects.append(subj)

        def subject_key(s):
            return (1, self.labels[s]) if isinstance(s, BlankNode) else (0, s.value)

        blocks = []
        for subj in sorted(top_subjects, key=subject_key):
            triples = list(self.graph.match(subject=subj))
            subj_str = "_:" + self.labels[subj] if isinstance(subj, BlankNode) else self.render_iri(subj)
            blocks.append(subj_str + " " + self.render_po_list(triples, 4) + " .")

        # orphan blank nodes that only ever appear as objects still parse
        # back via their label form, nothing to emit for them

        header = []
        for prefix in sorted(self.used_prefixes):
            header.append(f"@prefix {prefix}: <{self.prefixes[prefix]}> .")
        out = ""
        if header:
            out += "\n".join(header)
            if blocks:
                out += "\n\n"
        out += "\n\n".join(blocks)
        if blocks:
            out += "\n"
        return out


def serialize_turtle(
    graph: Graph,
    base: Optional[str] = None,
    prefixes: Optional[dict[str, str]] = None,
) -> str:
    """Serialize a graph to Turtle.

    Deterministic for a given graph/base/prefix map: subjects,
    predicates and objects are emitted in a stable order. Same-origin
    IRIs are written root-relative when a base is given, fragments of
    the base as <#...>, and the preferred vocabulary prefixes are
    declared only when used.
    """
    ser = _Serializer(graph, base, dict(PREFERRED_PREFIXES if prefixes is None else prefixes))
    return ser.serialize()
