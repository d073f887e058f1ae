"""Command line entry points: serve, generate, window, client, verify."""

from __future__ import annotations

import argparse
import logging
import os
import random
import sys
import uuid
from decimal import Decimal
from pathlib import Path
from typing import Optional
from urllib.parse import urljoin, urlsplit

from . import __version__
from .clock import ManualClock, RealClock
from .client import (
    BUILTIN_TRANSFORMS,
    MergePolicy,
    PollSchedule,
    StreamOperatorKind,
    WindowSnapshot,
    derive,
    emit,
    run_polling,
    transform,
)
from .errors import StreamContainersError
from .rdf.temporal import Duration, Timestamp, parse_duration, parse_timestamp
from .rdf.terms import BlankNode, Graph, IRI, Literal, Triple
from .rdf.turtle import serialize_turtle
from .server import ServerConfig, StreamContainerServer
from .sim import SimulatedEnvironment, parse_scenario_file, run_scenario
from .transport import TURTLE, HttpRequest, RealTransport, Transport
from .vocab import EX, LDP, LDPSC, RDF, SOSA, XSD

log = logging.getLogger(__name__)

BUNDLED_SCENARIOS = Path(__file__).parent / "scenarios"


def _duration(text: str) -> Duration:
    try:
        return parse_duration(text)
    except StreamContainersError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _timestamp(text: str) -> Timestamp:
    try:
        return parse_timestamp(text)
    except StreamContainersError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _iri(text: str) -> IRI:
    if "://" not in text:
        raise argparse.ArgumentTypeError(f"expected an absolute IRI, got {text!r}")
    return IRI(text)


def _value_range(text: str) -> tuple[Decimal, Decimal]:
    lo, sep, hi = text.partition("..")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected min..max, got {text!r}")
    try:
        low, high = Decimal(lo), Decimal(hi)
    except ArithmeticError:
        raise argparse.ArgumentTypeError(f"range bounds must be decimals: {text!r}") from None
    if low > high:
        raise argparse.ArgumentTypeError(f"empty range: {text!r}")
    return low, high


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stream-containers",
        description="Pull-based RDF stream processing over web containers.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run a stream container server")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument(
        "--port",
        type=int,
        default=int(os.environ.get("STREAM_CONTAINERS_PORT", "8080")),
    )
    serve.add_argument(
        "--base-iri",
        default=os.environ.get("STREAM_CONTAINERS_BASE_IRI"),
        help="origin used to mint resource IRIs (default http://HOST:PORT)",
    )
    serve.add_argument(
        "--container",
        action="append",
        default=None,
        metavar="PATH",
        help="container path, repeatable (default /stream)",
    )
    serve.add_argument("--retention", type=_duration, default=None, metavar="DURATION")
    serve.add_argument("--sweep-period", type=_duration, default=parse_duration("PT10S"), metavar="DURATION")
    serve.add_argument(
        "--simulated-clock",
        type=_timestamp,
        default=None,
        metavar="TIMESTAMP",
        help="freeze the server clock at this instant (deterministic demos)",
    )

    generate = sub.add_parser("generate", help="post synthetic sensor observations")
    generate.add_argument("--target", type=_iri, required=True, help="container IRI")
    generate.add_argument("--period", type=_duration, default=parse_duration("PT1S"))
    generate.add_argument("--count", type=int, required=True)
    generate.add_argument("--property", type=_iri, default=EX.temperature, help="observed property IRI")
    generate.add_argument("--range", type=_value_range, default=(Decimal("10"), Decimal("30")), metavar="MIN..MAX")
    generate.add_argument("--timestamp-relation", type=_iri, default=SOSA.resultTime)
    generate.add_argument("--seed", type=int, default=None)

    window = sub.add_parser("window", help="replace a container's window spec")
    window.add_argument("--container", type=_iri, required=True)
    window.add_argument("--membership-resource", required=True, help="IRI, may be relative to the container")
    window.add_argument("--member-relation", type=_iri, default=EX.inWindow)
    window.add_argument("--timestamp-relation", type=_iri, default=SOSA.resultTime)
    size = window.add_mutually_exclusive_group(required=True)
    size.add_argument("--logical", type=_duration, default=None, metavar="DURATION")
    size.add_argument("--physical", type=int, default=None, metavar="N")

    client = sub.add_parser("client", help="poll a window and derive a result stream")
    client.add_argument("--container", type=_iri, required=True)
    client.add_argument("--window", required=True, help="membership resource IRI, may be relative")
    client.add_argument("--t0", default="now", help="first evaluation instant, or 'now'")
    client.add_argument("--beta", type=_duration, required=True, help="polling period")
    client.add_argument("--count", type=int, default=None, help="cycles to run (default: forever)")
    client.add_argument(
        "--op",
        choices=[k.value for k in StreamOperatorKind],
        default="rstream",
    )
    client.add_argument("--merge", choices=["union"], default="union")
    client.add_argument("--transform", choices=sorted(BUILTIN_TRANSFORMS), default="identity")
    client.add_argument("--sink", type=_iri, default=None, help="container to emit results to")
    client.add_argument("--timestamp-relation", type=_iri, default=SOSA.resultTime)
    client.add_argument("--transport", choices=["real", "simulated"], default="real")
    client.add_argument("--delta", type=_duration, default=parse_duration("PT0.1S"), help="expected request delay")

    verify = sub.add_parser("verify", help="replay a scenario and check window equivalence")
    verify.add_argument(
        "--scenario",
        required=True,
        help="scenario file path, or the name of a bundled scenario",
    )
    verify.add_argument("--alpha", type=_duration, default=parse_duration("PT2M"), help="window size")
    verify.add_argument("--beta", type=_duration, default=parse_duration("PT30S"), help="polling period")
    verify.add_argument("--t0", type=_timestamp, default=parse_timestamp("2021-07-20T10:00:00.000Z"))
    verify.add_argument("--cycles", type=int, default=1)
    verify.add_argument("--latency", type=_duration, default=parse_duration("PT0.05S"))

    return parser


# ---------------------------------------------------------------------------


def cmd_serve(args) -> int:
    clock = ManualClock(args.simulated_clock) if args.simulated_clock else RealClock()
    config = ServerConfig(
        host=args.host,
        port=args.port,
        base_iri=args.base_iri,
        containers=args.container or ["/stream"],
        retention=args.retention,
        sweep_period=args.sweep_period,
    )
    server = StreamContainerServer(config, clock=clock)
    for path in config.normalized_containers():
        print(f"container: {server.base_iri}{path or '/'}".rstrip(), flush=True)
    server.serve_forever()
    return 0


def cmd_generate(args) -> int:
    if args.count < 0:
        print("error: --count cannot be negative", file=sys.stderr)
        return 2
    rng = random.Random(args.seed)
    clock = RealClock()
    transport = RealTransport(clock=clock)
    low, high = args.range
    cents = int((high - low) * 100)
    for i in range(args.count):
        value = low + Decimal(rng.randint(0, cents)) / 100 if cents else low
        subject = IRI(f"urn:uuid:{uuid.UUID(int=rng.getrandbits(128), version=4)}")
        graph = Graph(
            [
                Triple(subject, RDF.type, SOSA.Observation),
                Triple(subject, SOSA.observedProperty, args.property),
                Triple(subject, SOSA.hasSimpleResult, Literal(str(value), XSD.decimal)),
                Triple(
                    subject,
                    args.timestamp_relation,
                    Literal(clock.now().isoformat(), XSD.dateTimeStamp),
                ),
            ]
        )
        body = serialize_turtle(graph, base=args.target.value).encode("utf-8")
        result = transport.request(
            HttpRequest("POST", args.target.value, {"Content-Type": f"{TURTLE}; charset=utf-8"}, body)
        )
        if result.response.status != 201:
            print(
                f"error: POST {args.target.value} returned {result.response.status}",
                file=sys.stderr,
            )
            return 1
        print(result.response.header("Location"))
        if i + 1 < args.count:
            clock.sleep_until(clock.now() + args.period)
    return 0


def cmd_window(args) -> int:
    container = args.container
    membership = IRI(urljoin(container.value, args.membership_resource))
    node = BlankNode("w")
    triples = [
        Triple(container, LDPSC.window, node),
        Triple(node, LDP.hasMemberRelation, args.member_relation),
        Triple(node, LDP.membershipResource, membership),
        Triple(node, LDPSC.contentTimestampRelation, args.timestamp_relation),
    ]
    if args.logical is not None:
        triples.append(Triple(node, LDPSC.logical, Literal(args.logical.isoformat(), XSD.duration)))
    else:
        triples.append(Triple(node, LDPSC.physical, Literal(str(args.physical), XSD.integer)))
    body = serialize_turtle(Graph(triples), base=container.value).encode("utf-8")
    result = RealTransport().request(
        HttpRequest("PUT", container.value, {"Content-Type": f"{TURTLE}; charset=utf-8"}, body)
    )
    if result.response.status != 204:
        print(
            f"error: PUT {container.value} returned {result.response.status}:\n"
            f"{result.response.text().strip()}",
            file=sys.stderr,
        )
        return 1
    print(f"window {membership.value} set on {container.value}")
    return 0


def cmd_client(args) -> int:
    container = args.container
    window = IRI(urljoin(container.value, args.window))
    op = StreamOperatorKind(args.op)
    fn = BUILTIN_TRANSFORMS[args.transform]

    if args.t0 != "now":
        try:
            parse_timestamp(args.t0)
        except StreamContainersError as exc:
            print(f"error: --t0: {exc}", file=sys.stderr)
            return 2

    if args.transport == "simulated":
        # dry-run mode: an in-process empty container under a virtual clock
        start = parse_timestamp("2021-07-20T10:00:00.000Z")
        env = SimulatedEnvironment(args.delta, start)
        parts = urlsplit(container.value)
        origin = f"{parts.scheme}://{parts.netloc}"
        cpath = "/" + parts.path.strip("/") if parts.path.strip("/") else ""
        env.add_service(origin, [cpath])
        transport: Transport = env.transport()
        clock = env.clock
        t0 = start + args.delta if args.t0 == "now" else parse_timestamp(args.t0)
    else:
        transport = RealTransport()
        clock = RealClock()
        t0 = clock.now() + args.delta if args.t0 == "now" else parse_timestamp(args.t0)

    schedule = PollSchedule(t0=t0, beta=args.beta, count=args.count, delta_allowance=args.delta)
    prev: Optional[WindowSnapshot] = None

    def handle(snapshot: WindowSnapshot) -> None:
        nonlocal prev
        derived = derive(op, prev, snapshot)
        prev = snapshot
        members = " ".join(sorted(iri.value for iri in derived))
        print(f"cycle t_eval={snapshot.t_eval} {op.value} members={len(derived)} {members}".rstrip())
        if not derived:
            return
        result = transform(
            WindowSnapshot(snapshot.t_eval, snapshot.window, derived), MergePolicy(args.merge), fn
        )
        if args.sink is not None:
            location = emit(
                result, args.timestamp_relation, snapshot.t_eval, args.sink, transport=transport
            )
            print(f"  emitted {location.value}")
        else:
            text = serialize_turtle(result).strip()
            if text:
                print("  " + text.replace("\n", "\n  "))

    try:
        trace = run_polling(
            schedule, container, window, handle, transport=transport, clock=clock
        )
    except KeyboardInterrupt:
        return 0
    except (StreamContainersError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    failures = sum(1 for record in trace if record.error)
    return 1 if failures == len(trace) and trace else 0


def cmd_verify(args) -> int:
    candidate = BUNDLED_SCENARIOS / args.scenario / "scenario.txt"
    path = candidate if candidate.exists() else Path(args.scenario)
    if not path.exists():
        bundled = ", ".join(sorted(p.name for p in BUNDLED_SCENARIOS.iterdir() if p.is_dir()))
        print(
            f"error: scenario {args.scenario!r} not found (bundled: {bundled})",
            file=sys.stderr,
        )
        return 2
    try:
        scenario = parse_scenario_file(path)
        run = run_scenario(scenario, args.alpha, args.beta, args.t0, args.cycles, args.latency)
    except (StreamContainersError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"scenario: {scenario.name} ({len(scenario.elements)} element(s))")
    print(
        f"window: alpha={args.alpha} beta={args.beta} t0={args.t0} "
        f"cycles={args.cycles} latency={args.latency}"
    )
    for record in run.trace:
        members = sorted(iri.value for iri in record.snapshot.members) if record.snapshot else []
        print(f"  cycle {record.index} at {record.scheduled}: {len(members)} member(s) {' '.join(members)}".rstrip())
    print(run.report.render())
    return 0 if run.report.passed else 1


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO if args.command == "serve" else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    handlers = {
        "serve": cmd_serve,
        "generate": cmd_generate,
        "window": cmd_window,
        "client": cmd_client,
        "verify": cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
