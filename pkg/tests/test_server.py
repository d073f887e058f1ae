"""Container service protocol behavior, then the real socket binding."""

import http.client
import threading
import urllib.request

import pytest

from stream_containers import (
    ContainerService,
    Graph,
    HttpRequest,
    IRI,
    RealTransport,
    Timestamp,
    fetch_window,
    isomorphic,
    parse_duration,
    parse_turtle,
    serialize_turtle,
)
from stream_containers.vocab import EX, LDP, LDPSC, RDF, SOSA

from conftest import FIGURE_CONTAINER_DOC, T0, observation

BASE = "http://example.com"
TURTLE_CT = {"Content-Type": "text/turtle; charset=utf-8"}


def root_service(**kwargs) -> ContainerService:
    return ContainerService(BASE, [""], **kwargs)


def get(service, path="", now=T0, headers=None):
    return service.handle(HttpRequest("GET", BASE + path, headers or {}), now)


def post(service, body, path="", now=T0, headers=None):
    return service.handle(
        HttpRequest("POST", BASE + path, headers or dict(TURTLE_CT), body.encode()), now
    )


def put(service, body, path="", now=T0):
    return service.handle(HttpRequest("PUT", BASE + path, dict(TURTLE_CT), body.encode()), now)


def figure_service() -> ContainerService:
    """Root-mounted container in the figure's state at T0."""
    service = root_service()
    assert put(service, FIGURE_CONTAINER_DOC).status == 204
    for minutes_ago in (3, 2, 1, 0):
        stamp = T0 - parse_duration(f"PT{minutes_ago}M")
        body = serialize_turtle(observation(f"urn:obs:{minutes_ago}", stamp))
        assert post(service, body, now=stamp).status == 201
    return service


class TestContainerGet:
    def test_fresh_container(self):
        response = get(root_service())
        assert response.status == 200
        graph = parse_turtle(response.text(), BASE)
        assert graph == Graph(
            [next(iter(parse_turtle(f"<> a <{LDPSC.base}StreamContainer> .", BASE)))]
        )

    def test_headers(self):
        response = get(root_service())
        assert response.header("Content-Type").startswith("text/turtle")
        assert response.header("Cache-Control") == "no-cache"
        link = response.header("Link")
        assert f'<{LDP.base}Container>; rel="type"' in link
        assert f'<{LDPSC.base}StreamContainer>; rel="type"' in link

    def test_figure_state_reproduced(self):
        response = get(figure_service())
        got = parse_turtle(response.text(), BASE)
        expected = parse_turtle(FIGURE_CONTAINER_DOC, BASE)
        assert isomorphic(got, expected)

    def test_membership_expires_as_clock_advances(self):
        service = figure_service()
        first = parse_turtle(get(service, now=T0).text(), BASE)
        later = parse_turtle(get(service, now=T0 + parse_duration("PT1M30S")).text(), BASE)
        window = IRI(f"{BASE}#window1")
        assert set(first.objects(subject=window, predicate=EX.inWindow)) == {
            IRI(f"{BASE}/2"),
            IRI(f"{BASE}/3"),
        }
        assert set(later.objects(subject=window, predicate=EX.inWindow)) == {IRI(f"{BASE}/3")}

    def test_unknown_paths_404(self):
        service = root_service()
        assert get(service, "/nope").status == 404
        assert get(service, "/0").status == 404
        assert service.handle(HttpRequest("GET", BASE + "/0/"), T0).status == 404

    def test_accept_negotiation(self):
        service = root_service()
        assert get(service, headers={"Accept": "application/json"}).status == 406
        assert get(service, headers={"Accept": "text/turtle;q=0.9, */*"}).status == 200
        assert get(service, headers={"Accept": "*/*"}).status == 200


class TestPost:
    def test_created_with_location(self):
        service = root_service()
        response = post(service, serialize_turtle(observation("urn:first", T0)))
        assert response.status == 201
        assert response.header("Location") == f"{BASE}/0"

    def test_empty_body_creates_empty_element(self):
        service = root_service()
        assert post(service, "").status == 201
        element = parse_turtle(get(service, "/0").text(), f"{BASE}/0")
        assert element == Graph()

    def test_syntax_error_400(self):
        assert post(root_service(), "<broken ...").status == 400

    def test_unsupported_media_type_415(self):
        response = post(
            root_service(), "{}", headers={"Content-Type": "application/ld+json"}
        )
        assert response.status == 415

    def test_post_to_element_405(self):
        service = root_service()
        post(service, "")
        response = service.handle(HttpRequest("POST", BASE + "/0", dict(TURTLE_CT), b""), T0)
        assert response.status == 405
        assert "GET" in response.header("Allow")


class TestElement:
    def test_figure_element_served(self):
        service = figure_service()
        response = get(service, "/3")
        assert response.status == 200
        assert response.header("Cache-Control") == "max-age=31536000, immutable"
        graph = parse_turtle(response.text(), f"{BASE}/3")
        assert set(graph.objects(predicate=SOSA.observedProperty)) == {EX.temperature}

    def test_repeated_gets_byte_identical(self):
        service = figure_service()
        assert get(service, "/2").body == get(service, "/2").body

    def test_delete_then_404(self):
        service = figure_service()
        assert service.handle(HttpRequest("DELETE", BASE + "/2"), T0).status == 204
        assert get(service, "/2").status == 404
        assert service.handle(HttpRequest("DELETE", BASE + "/2"), T0).status == 404

    def test_delete_recomputes_membership_and_keeps_paths(self):
        service = figure_service()
        service.handle(HttpRequest("DELETE", BASE + "/2"), T0)
        graph = parse_turtle(get(service).text(), BASE)
        contains = set(graph.objects(subject=IRI(BASE), predicate=LDP.contains))
        assert contains == {IRI(f"{BASE}/0"), IRI(f"{BASE}/1"), IRI(f"{BASE}/3")}
        window = IRI(f"{BASE}#window1")
        assert set(graph.objects(subject=window, predicate=EX.inWindow)) == {IRI(f"{BASE}/3")}

    def test_put_on_element_405(self):
        service = figure_service()
        response = service.handle(HttpRequest("PUT", BASE + "/3", dict(TURTLE_CT), b""), T0)
        assert response.status == 405


class TestPut:
    def test_put_then_get_shows_window(self):
        service = root_service()
        assert put(service, FIGURE_CONTAINER_DOC).status == 204
        graph = parse_turtle(get(service).text(), BASE)
        spec_nodes = list(graph.objects(subject=IRI(BASE), predicate=LDPSC.window))
        assert len(spec_nodes) == 1
        sizes = list(graph.objects(subject=spec_nodes[0], predicate=LDPSC.logical))
        assert [s.lexical for s in sizes] == ["PT2M"]

    def test_put_idempotent(self):
        service = root_service()
        put(service, FIGURE_CONTAINER_DOC)
        first = get(service).body
        put(service, FIGURE_CONTAINER_DOC)
        assert get(service).body == first

    def test_put_without_windows_clears_but_keeps_contents(self):
        service = figure_service()
        assert put(service, "<> a <urn:whatever> .").status == 204
        graph = parse_turtle(get(service).text(), BASE)
        assert len(list(graph.objects(subject=IRI(BASE), predicate=LDP.contains))) == 4
        assert list(graph.objects(subject=IRI(BASE), predicate=LDPSC.window)) == []

    def test_put_both_sizes_400_names_problem(self):
        body = (
            "@prefix ldpsc: <https://solid.ti.rw.fau.de/public/ns/stream-containers#> .\n"
            "@prefix ldp: <http://www.w3.org/ns/ldp#> .\n"
            "@prefix sosa: <http://www.w3.org/ns/sosa/> .\n"
            "@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n"
            "@prefix ex: <http://example.org/> .\n"
            "<> ldpsc:window [ ldp:hasMemberRelation ex:r ;"
            " ldp:membershipResource <#w> ;"
            " ldpsc:contentTimestampRelation sosa:resultTime ;"
            ' ldpsc:logical "PT2M"^^xsd:duration ; ldpsc:physical 3 ] .'
        )
        response = put(root_service(), body)
        assert response.status == 400
        assert "both" in response.text()

    def test_put_missing_property_named_in_body(self):
        body = (
            "@prefix ldpsc: <https://solid.ti.rw.fau.de/public/ns/stream-containers#> .\n"
            "@prefix sosa: <http://www.w3.org/ns/sosa/> .\n"
            "<> ldpsc:window [ ldpsc:contentTimestampRelation sosa:resultTime ;"
            " ldpsc:physical 3 ] ."
        )
        response = put(root_service(), body)
        assert response.status == 400
        assert "hasMemberRelation" in response.text()

    def test_put_syntax_error_400(self):
        assert put(root_service(), "<oops").status == 400


class TestOptionsAndRouting:
    def test_options_container(self):
        response = root_service().handle(HttpRequest("OPTIONS", BASE), T0)
        assert response.status == 204
        assert response.header("Allow") == "GET, POST, PUT, OPTIONS"

    def test_options_element(self):
        service = figure_service()
        response = service.handle(HttpRequest("OPTIONS", BASE + "/1"), T0)
        assert response.header("Allow") == "GET, DELETE, OPTIONS"

    def test_delete_container_405(self):
        assert root_service().handle(HttpRequest("DELETE", BASE), T0).status == 405

    def test_multi_container_isolation(self):
        service = ContainerService(BASE, ["/a", "/b"])
        post(service, "", "/a")
        assert get(service, "/a/0").status == 200
        assert get(service, "/b/0").status == 404
        graph_b = parse_turtle(get(service, "/b").text(), BASE + "/b")
        assert list(graph_b.objects(predicate=LDP.contains)) == []

    def test_elements_live_under_their_container(self):
        service = ContainerService(BASE, ["/a"])
        response = post(service, "", "/a")
        assert response.header("Location") == f"{BASE}/a/0"

    def test_base_iri_validation(self):
        with pytest.raises(ValueError):
            ContainerService("not-absolute", [""])
        with pytest.raises(ValueError):
            ContainerService("http://h/api", ["/x"])

    def test_overlapping_containers_rejected(self):
        from stream_containers import ServerConfig

        with pytest.raises(ValueError):
            ServerConfig(containers=["/a", "/a/b"]).normalized_containers()
        with pytest.raises(ValueError):
            ServerConfig(containers=["/", "/b"]).normalized_containers()


class TestRetentionSweep:
    def test_sweep_removes_exactly_predicted(self):
        service = root_service(retention=parse_duration("P1D"))
        put(service, FIGURE_CONTAINER_DOC)
        ages_h = [30, 25, 23, 1, 0]
        for k, age in enumerate(ages_h):
            stamp = T0 - parse_duration(f"PT{age}H")
            post(service, serialize_turtle(observation(f"urn:o{k}", stamp)), now=stamp)
        removed = service.sweep(T0)
        expected = {f"/{k}" for k, age in enumerate(ages_h) if age >= 24}
        assert set(removed[""]) == expected
        graph = parse_turtle(get(service).text(), BASE)
        contains = {o.value for o in graph.objects(predicate=LDP.contains)}
        assert contains == {f"{BASE}/{k}" for k, age in enumerate(ages_h) if age < 24}

    def test_without_retention_container_grows(self):
        service = root_service()
        for k in range(5):
            post(service, "")
        assert service.sweep(T0 + parse_duration("P365D")) == {}
        assert len(service.state("").elements) == 5


class TestSocketServer:
    def test_get_over_the_wire(self, http_server):
        base = http_server.base_iri
        with urllib.request.urlopen(f"{base}/tempstream") as response:
            assert response.status == 200
            assert response.headers["Content-Type"].startswith("text/turtle")
            assert "StreamContainer" in response.read().decode()

    def test_concurrent_posts_unique_gapless_locations(self, http_server):
        base = http_server.base_iri
        transport = RealTransport()
        locations = []
        lock = threading.Lock()
        body = serialize_turtle(observation("urn:obs", T0)).encode()

        def worker():
            for _ in range(5):
                result = transport.request(
                    HttpRequest("POST", f"{base}/tempstream", dict(TURTLE_CT), body)
                )
                assert result.response.status == 201
                with lock:
                    locations.append(result.response.header("Location"))

        threads = [threading.Thread(target=worker) for _ in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(locations) == 40
        assert len(set(locations)) == 40
        seqs = sorted(int(loc.rsplit("/", 1)[1]) for loc in locations)
        assert seqs == list(range(40))

    def test_element_bytes_stable_over_the_wire(self, http_server):
        base = http_server.base_iri
        transport = RealTransport()
        transport.request(
            HttpRequest(
                "POST",
                f"{base}/tempstream",
                dict(TURTLE_CT),
                serialize_turtle(observation("urn:obs", T0)).encode(),
            )
        )
        reads = {
            transport.request(HttpRequest("GET", f"{base}/tempstream/0")).response.body
            for _ in range(5)
        }
        assert len(reads) == 1

    def test_keep_alive_single_connection(self, http_server):
        conn = http.client.HTTPConnection("127.0.0.1", http_server.port, timeout=5)
        try:
            for _ in range(3):
                conn.request("GET", "/tempstream")
                response = conn.getresponse()
                assert response.status == 200
                response.read()
        finally:
            conn.close()

    def test_parallel_member_fetch_is_faster_than_sequential(self, http_server):
        import time

        base = http_server.base_iri
        transport = RealTransport()
        container = IRI(f"{base}/tempstream")
        put_body = (
            "@prefix ldpsc: <https://solid.ti.rw.fau.de/public/ns/stream-containers#> .\n"
            "@prefix ldp: <http://www.w3.org/ns/ldp#> .\n"
            "@prefix sosa: <http://www.w3.org/ns/sosa/> .\n"
            "@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n"
            "@prefix ex: <http://example.org/> .\n"
            "<> ldpsc:window [ ldp:hasMemberRelation ex:inWindow ;"
            " ldp:membershipResource <#w> ;"
            " ldpsc:contentTimestampRelation sosa:resultTime ;"
            ' ldpsc:logical "PT10M"^^xsd:duration ] .'
        )
        transport.request(HttpRequest("PUT", container.value, dict(TURTLE_CT), put_body.encode()))
        now = RealTransport().clock.now()
        for k in range(6):
            transport.request(
                HttpRequest(
                    "POST",
                    container.value,
                    dict(TURTLE_CT),
                    serialize_turtle(observation(f"urn:o{k}", now)).encode(),
                )
            )
        delay = 0.15
        http_server._httpd.debug_delay_s = delay
        try:
            start = time.monotonic()
            snapshot = fetch_window(transport, container, IRI(f"{container.value}#w"))
            elapsed = time.monotonic() - start
        finally:
            http_server._httpd.debug_delay_s = 0.0
        assert len(snapshot.members) == 6
        # two delayed phases plus slack, far under the 7-request
        # sequential floor of 1.05 s
        assert elapsed < 5 * delay
