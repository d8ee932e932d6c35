import threading
from collections import Counter
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest

from linksig.corpus import LiveFetcher, RetryPolicy

FIXTURES = Path(__file__).parent / "fixtures"


class ScriptedServer:
    """Local HTTP server answering from a route table.

    A route maps a path to a list of (status, body) replies consumed in
    order (the last one repeats) or to a callable path -> (status, body).
    Unrouted paths go to ``fallback``.
    """

    def __init__(self):
        self.routes = {}
        self.fallback = lambda path: (404, b"<html><body>no such page</body></html>")
        self.hits = Counter()
        self.lock = threading.Lock()
        server = self

        class Handler(BaseHTTPRequestHandler):
            def do_GET(self):
                status, body = server.reply(self.path)
                self.send_response(status)
                self.send_header("Content-Type", "text/html; charset=utf-8")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def log_message(self, *args):
                pass

        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self.thread.start()

    @property
    def base(self):
        return f"http://127.0.0.1:{self.httpd.server_address[1]}"

    def url(self, path):
        return self.base + path

    def reply(self, path):
        with self.lock:
            self.hits[path] += 1
            route = self.routes.get(path)
            if route is None:
                return self.fallback(path)
            if callable(route):
                return route(path)
            idx = min(self.hits[path], len(route)) - 1
            return route[idx]

    def close(self):
        self.httpd.shutdown()
        self.httpd.server_close()


@pytest.fixture
def server():
    srv = ScriptedServer()
    yield srv
    srv.close()


@pytest.fixture
def live_fetcher():
    with LiveFetcher(RetryPolicy(retry_delay=0, host_delay=0, timeout=5)) as f:
        yield f


@pytest.fixture
def tiny_corpus_path():
    return FIXTURES / "tiny_corpus"


# one PASS/FAIL line per acceptance criterion, printed after the run

_criteria: dict[int, list[str]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or report.outcome != "passed":
        name = report.nodeid.split("::test_criterion_", 1)[1]
        number = int(name.split("_", 1)[0])
        _criteria.setdefault(number, []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        ok = all(o == "passed" for o in _criteria[number])
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}")
