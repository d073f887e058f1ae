"""Reference sliding-window semantics and the pipeline equivalence check.

This module restates the windowing model independently of the server:
a tuple stream pairs each graph with its extracted timestamps, an
instant window selects the graphs stamped in (open, close], and a
sliding spec unrolls into a window sequence stepped by beta. The
equivalence checker compares a polling client's trace against that
sequence cycle by cycle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Optional, Sequence

from .client import CycleRecord
from .core import timestamp_extract
from .rdf.temporal import Duration, Timestamp
from .rdf.terms import Graph, IRI


@dataclass(frozen=True)
class StreamEntry:
    """One (graph, timestamp) pair; ref identifies the source element."""

    graph: Graph
    t: Timestamp
    ref: Hashable


@dataclass(frozen=True)
class TupleStream:
    entries: tuple[StreamEntry, ...]

    def refs(self) -> frozenset:
        return frozenset(e.ref for e in self.entries)

    def shifted(self, d: Duration) -> "TupleStream":
        return TupleStream(tuple(StreamEntry(e.graph, e.t + d, e.ref) for e in self.entries))


@dataclass(frozen=True)
class InstantWindow:
    """Graphs stamped within (open_at, close_at], identified by ref."""

    open_at: Timestamp
    close_at: Timestamp
    members: frozenset


@dataclass(frozen=True)
class SlidingWindowSpec:
    alpha: Duration
    beta: Duration
    t0: Timestamp

    def __post_init__(self):
        if self.alpha.ms <= 0:
            raise ValueError(f"window size must be positive, got {self.alpha}")
        if self.beta.ms <= 0:
            raise ValueError(f"step size must be positive, got {self.beta}")


def to_tuple_stream(elements: Sequence[Graph], pred: IRI) -> TupleStream:
    """One entry per extracted timestamp; untimestamped graphs are omitted.

    Refs are the element positions in the input sequence.
    """
    entries = []
    for i, g in enumerate(elements):
        for t in sorted(timestamp_extract(g, pred)):
            entries.append(StreamEntry(g, t, i))
    return TupleStream(tuple(entries))


def instant_window(s: TupleStream, o: Timestamp, c: Timestamp) -> InstantWindow:
    if o > c:
        raise ValueError(f"window open {o} is after close {c}")
    members = frozenset(e.ref for e in s.entries if o < e.t <= c)
    return InstantWindow(o, c, members)


def sliding_window_sequence(s: TupleStream, spec: SlidingWindowSpec, count: int) -> list[InstantWindow]:
    """count instant windows closing at t0 + i*beta, each alpha wide."""
    windows = []
    for i in range(count):
        close = spec.t0 + i * spec.beta
        windows.append(instant_window(s, close - spec.alpha, close))
    return windows


@dataclass(frozen=True)
class CycleDivergence:
    index: int
    expected: frozenset
    observed: frozenset
    detail: str = ""


@dataclass(frozen=True)
class EquivalenceReport:
    passed: bool
    cycles: int
    divergence: Optional[CycleDivergence] = None
    notes: tuple[str, ...] = field(default=())

    def render(self) -> str:
        lines = []
        verdict = "PASS" if self.passed else "FAIL"
        lines.append(f"{verdict}: {self.cycles} cycle(s) compared")
        for note in self.notes:
            lines.append(f"  note: {note}")
        if self.divergence is not None:
            d = self.divergence
            lines.append(f"  first divergent cycle: {d.index}")
            if d.detail:
                lines.append(f"  {d.detail}")
            lines.append(f"  expected members: {_render_refs(d.expected)}")
            lines.append(f"  observed members: {_render_refs(d.observed)}")
        return "\n".join(lines)


def _render_refs(refs: frozenset) -> str:
    if not refs:
        return "(none)"
    return ", ".join(str(r) for r in sorted(refs, key=str))


def check_equivalence(
    trace: Sequence[CycleRecord],
    spec: SlidingWindowSpec,
    s: TupleStream,
    expected_cycles: Optional[int] = None,
) -> EquivalenceReport:
    """PASS iff every polling cycle saw exactly the oracle window's members.

    The trace must come from a schedule with the same t0/beta against a
    container whose logical window has size alpha over the stream s,
    with refs in s being the element IRIs the members resolve to. The
    first divergent cycle is reported with both member sets.
    """
    if expected_cycles is not None and expected_cycles != len(trace):
        return EquivalenceReport(
            False,
            len(trace),
            CycleDivergence(
                min(expected_cycles, len(trace)),
                frozenset(),
                frozenset(),
                f"trace has {len(trace)} cycle(s), schedule planned {expected_cycles}",
            ),
        )
    expected_windows = sliding_window_sequence(s, spec, len(trace))
    notes = []
    for record, window in zip(trace, expected_windows):
        if record.snapshot is None:
            return EquivalenceReport(
                False,
                len(trace),
                CycleDivergence(record.index, window.members, frozenset(), f"cycle failed: {record.error}"),
            )
        if record.scheduled != window.close_at:
            return EquivalenceReport(
                False,
                len(trace),
                CycleDivergence(
                    record.index,
                    window.members,
                    frozenset(record.snapshot.members),
                    f"cycle evaluated at {record.scheduled}, oracle window closes at {window.close_at}",
                ),
            )
        observed = frozenset(record.snapshot.members)
        if observed != window.members:
            return EquivalenceReport(
                False, len(trace), CycleDivergence(record.index, window.members, observed)
            )
        if record.overrun:
            notes.append(f"cycle {record.index} overran its deadline")
    return EquivalenceReport(True, len(trace), notes=tuple(notes))
