"""Reference window semantics and the equivalence checker."""

import math
import random

import pytest

from stream_containers import (
    Duration,
    Graph,
    IRI,
    Literal,
    Scenario,
    ScenarioElement,
    SlidingWindowSpec,
    StreamEntry,
    Timestamp,
    Triple,
    TupleStream,
    check_equivalence,
    instant_window,
    parse_duration,
    parse_timestamp,
    parse_turtle,
    run_scenario,
    sliding_window_sequence,
    to_tuple_stream,
    random_scenario,
)
from stream_containers.vocab import SOSA, XSD

from conftest import FIGURE_RESOURCE_DOC, T0, observation


def stamped_graph(*stamps: Timestamp) -> Graph:
    return Graph(
        Triple(IRI(f"urn:s{i}"), SOSA.resultTime, Literal(s.isoformat(), XSD.dateTimeStamp))
        for i, s in enumerate(stamps)
    )


class TestToTupleStream:
    def test_figure_observation_single_pair(self):
        g = parse_turtle(FIGURE_RESOURCE_DOC, "http://example.com")
        stream = to_tuple_stream([g], SOSA.resultTime)
        assert len(stream.entries) == 1
        assert stream.entries[0].t == parse_timestamp("2021-07-20T10:51:08.657Z")
        assert stream.entries[0].ref == 0

    def test_untimestamped_graph_omitted(self):
        assert to_tuple_stream([observation("urn:bare")], SOSA.resultTime).entries == ()

    def test_pair_multiset_matches_brute_scan(self):
        rng = random.Random(888)
        for _ in range(50):
            graphs = []
            for _ in range(rng.randint(0, 8)):
                stamps = [T0 + Duration(rng.randint(-10**6, 10**6)) for _ in range(rng.randint(0, 3))]
                graphs.append(stamped_graph(*stamps))
            stream = to_tuple_stream(graphs, SOSA.resultTime)
            expected = []
            for i, g in enumerate(graphs):
                for t in g:
                    if t.predicate == SOSA.resultTime:
                        expected.append((i, parse_timestamp(t.object.lexical)))
            assert sorted((e.ref, e.t) for e in stream.entries) == sorted(expected)

    def test_count_preserved(self):
        graphs = [stamped_graph(T0), stamped_graph(T0, T0 + Duration(1)), stamped_graph()]
        stream = to_tuple_stream(graphs, SOSA.resultTime)
        assert len(stream.entries) == 3


class TestInstantWindow:
    def test_empty_interval(self):
        stream = to_tuple_stream([stamped_graph(T0)], SOSA.resultTime)
        assert instant_window(stream, T0, T0).members == frozenset()

    def test_boundaries(self):
        stream = TupleStream(
            (
                StreamEntry(Graph(), T0 - Duration(1000), "at-open"),
                StreamEntry(Graph(), T0, "at-close"),
            )
        )
        window = instant_window(stream, T0 - Duration(1000), T0)
        assert window.members == frozenset({"at-close"})

    def test_open_after_close_rejected(self):
        with pytest.raises(ValueError):
            instant_window(TupleStream(()), T0, T0 - Duration(1))

    def test_random_streams_match_linear_scan(self):
        rng = random.Random(999)
        for _ in range(100):
            entries = tuple(
                StreamEntry(Graph(), T0 + Duration(rng.randint(-10**5, 10**5)), f"e{i}")
                for i in range(rng.randint(0, 40))
            )
            stream = TupleStream(entries)
            o = T0 + Duration(rng.randint(-10**5, 0))
            c = o + Duration(rng.randint(0, 2 * 10**5))
            got = instant_window(stream, o, c).members
            expected = {e.ref for e in entries if o.epoch_ms < e.t.epoch_ms <= c.epoch_ms}
            assert got == expected


class TestSlidingWindowSequence:
    def test_adjacent_windows_tile_when_beta_equals_alpha(self):
        spec = SlidingWindowSpec(Duration(5000), Duration(5000), T0)
        windows = sliding_window_sequence(TupleStream(()), spec, 4)
        for first, second in zip(windows, windows[1:]):
            assert first.close_at == second.open_at

    def test_single_window_bounds(self):
        alpha = parse_duration("PT2M")
        spec = SlidingWindowSpec(alpha, Duration(1000), T0)
        [window] = sliding_window_sequence(TupleStream(()), spec, 1)
        assert window.open_at == T0 - alpha
        assert window.close_at == T0

    def test_each_window_equals_direct_instant_window(self):
        rng = random.Random(140)
        for _ in range(50):
            entries = tuple(
                StreamEntry(Graph(), T0 + Duration(rng.randint(-10**6, 10**6)), i)
                for i in range(rng.randint(0, 60))
            )
            stream = TupleStream(entries)
            spec = SlidingWindowSpec(
                Duration(rng.randint(1, 10**5)), Duration(rng.randint(1, 10**5)), T0
            )
            count = rng.randint(0, 12)
            windows = sliding_window_sequence(stream, spec, count)
            assert len(windows) == count
            for i, window in enumerate(windows):
                close = T0 + Duration(spec.beta.ms * i)
                assert window == instant_window(stream, close - spec.alpha, close)

    def test_invalid_spec_rejected(self):
        with pytest.raises(ValueError):
            SlidingWindowSpec(Duration(0), Duration(1), T0)
        with pytest.raises(ValueError):
            SlidingWindowSpec(Duration(1), Duration(0), T0)


class TestProperties:
    def test_shift_invariance(self):
        rng = random.Random(77)
        for _ in range(30):
            entries = tuple(
                StreamEntry(Graph(), T0 + Duration(rng.randint(-10**5, 10**5)), i)
                for i in range(rng.randint(0, 30))
            )
            stream = TupleStream(entries)
            spec = SlidingWindowSpec(Duration(rng.randint(1, 10**5)), Duration(rng.randint(1, 10**5)), T0)
            shift_by = Duration(rng.randint(-10**6, 10**6))
            moved = SlidingWindowSpec(spec.alpha, spec.beta, T0 + shift_by)
            original = sliding_window_sequence(stream, spec, 8)
            shifted = sliding_window_sequence(stream.shifted(shift_by), moved, 8)
            assert [w.members for w in original] == [w.members for w in shifted]

    def test_sparse_steps_bound_consecutive_appearances(self):
        rng = random.Random(78)
        for _ in range(30):
            alpha = Duration(rng.randint(1, 50_000))
            beta = Duration(rng.randint(alpha.ms, 80_000))
            limit = math.ceil(alpha.ms / beta.ms)
            entries = tuple(
                StreamEntry(Graph(), T0 + Duration(rng.randint(0, 10**5)), i) for i in range(40)
            )
            windows = sliding_window_sequence(
                TupleStream(entries), SlidingWindowSpec(alpha, beta, T0), 15
            )
            for ref in range(40):
                runs = max(
                    (sum(1 for w in group) for present, group in _groups(windows, ref) if present),
                    default=0,
                )
                assert runs <= limit


def _groups(windows, ref):
    import itertools

    return itertools.groupby(windows, key=lambda w: ref in w.members)


class TestCheckEquivalence:
    def test_empty_stream_passes(self):
        scenario = Scenario("empty", ())
        run = run_scenario(
            scenario, parse_duration("PT1M"), parse_duration("PT10S"), T0, 5, parse_duration("PT0.05S")
        )
        assert run.report.passed
        assert all(record.snapshot.members == {} for record in run.trace)

    def test_late_arrival_appears_one_cycle_later(self):
        """An element stamped inside window i but arriving after cycle i
        is first seen by cycle i+1, making the naive oracle diverge at i."""
        beta = parse_duration("PT10S")
        alpha = parse_duration("PT1M")
        latency = parse_duration("PT0.1S")
        # arrival 2 s after cycle 1's evaluation, stamp 1 s before it
        element = ScenarioElement(beta + parse_duration("PT2S"), stamped_graph(T0 + beta - Duration(1000)))
        run = run_scenario(Scenario("late", (element,)), alpha, beta, T0, 4, latency)
        assert not run.report.passed
        assert run.report.divergence.index == 1
        assert run.report.divergence.observed == frozenset()
        # the element shows up in the next cycle's snapshot
        assert len(run.trace[2].snapshot.members) == 1

    def test_length_mismatch_fails(self):
        stream = TupleStream(())
        spec = SlidingWindowSpec(Duration(1000), Duration(1000), T0)
        report = check_equivalence([], spec, stream, expected_cycles=3)
        assert not report.passed
        assert "planned 3" in report.divergence.detail

    def test_randomized_scenarios_pass(self):
        rng = random.Random(20_21)
        for i in range(10):
            scenario, alpha, beta, cycles, latency = random_scenario(rng, i)
            run = run_scenario(scenario, alpha, beta, T0, cycles, latency)
            assert run.report.passed, run.report.render()

    def test_report_renders_divergence(self):
        beta = parse_duration("PT10S")
        element = ScenarioElement(beta + parse_duration("PT2S"), stamped_graph(T0 + beta - Duration(1000)))
        run = run_scenario(
            Scenario("late", (element,)), parse_duration("PT1M"), beta, T0, 3, parse_duration("PT0.1S")
        )
        text = run.report.render()
        assert text.startswith("FAIL")
        assert "first divergent cycle: 1" in text
        assert "expected members" in text
