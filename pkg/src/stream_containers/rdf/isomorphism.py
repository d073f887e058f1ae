"""Graph isomorphism under blank-node bijection.

Exhaustive backtracking search over candidate blank-node mappings,
pruned by structural signatures. Intended for desk-scale graphs; the
node count is capped to keep the search bounded.
"""

from __future__ import annotations

from .terms import BlankNode, Graph, Triple

MAX_BLANK_NODES = 12


def _is_ground(t: Triple) -> bool:
    return not isinstance(t.subject, BlankNode) and not isinstance(t.object, BlankNode)


def _signature(graph: Graph, node: BlankNode):
    entries = []
    for t in graph:
        s_is = t.subject == node
        o_is = t.object == node
        if not s_is and not o_is:
            continue
        other = t.object if s_is else t.subject
        other_key = ("bnode",) if isinstance(other, BlankNode) else ("ground", str(other))
        entries.append((s_is, o_is, t.predicate.value, other_key))
    return tuple(sorted(entries))


def isomorphic(a: Graph, b: Graph) -> bool:
    """True iff some blank-node bijection maps a onto b exactly."""
    if len(a) != len(b):
        return False
    if {t for t in a if _is_ground(t)} != {t for t in b if _is_ground(t)}:
        return False
    a_nodes = sorted(a.blank_nodes(), key=lambda n: n.label)
    b_nodes = sorted(b.blank_nodes(), key=lambda n: n.label)
    if len(a_nodes) != len(b_nodes):
        return False
    if not a_nodes:
        return True
    if len(a_nodes) > MAX_BLANK_NODES:
        raise ValueError(f"graphs with more than {MAX_BLANK_NODES} blank nodes are out of scope")

    sig_a = {n: _signature(a, n) for n in a_nodes}
    sig_b = {n: _signature(b, n) for n in b_nodes}
    if sorted(sig_a.values()) != sorted(sig_b.values()):
        return False

    candidates = {n: [m for m in b_nodes if sig_b[m] == sig_a[n]] for n in a_nodes}
    order = sorted(a_nodes, key=lambda n: len(candidates[n]))
    b_triples = b.triples

    def apply(term, mapping):
        return mapping.get(term, term) if isinstance(term, BlankNode) else term

    def consistent(mapping: dict) -> bool:
        for t in a:
            s = apply(t.subject, mapping)
            o = apply(t.object, mapping)
            if isinstance(s, BlankNode) and t.subject not in mapping:
                continue
            if isinstance(o, BlankNode) and t.object not in mapping:
                continue
            if isinstance(t.subject, BlankNode) or isinstance(t.object, BlankNode):
                if Triple(s, t.predicate, o) not in b_triples:
                    return False
        return True

    def search(i: int, mapping: dict, used: set) -> bool:
        if i == len(order):
            return True
        node = order[i]
        for cand in candidates[node]:
            if cand in used:
                continue
            mapping[node] = cand
            used.add(cand)
            if consistent(mapping) and search(i + 1, mapping, used):
                return True
            del mapping[node]
            used.remove(cand)
        return False

    return search(0, {}, set())
