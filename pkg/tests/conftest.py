import json
from pathlib import Path

import pytest

from frontmap.ingest import parse_export
from frontmap.synthgen import SynthSpec, generate

DATA = Path(__file__).parent / "data"

PLANTED_SPEC = SynthSpec(cluster_sizes=(50, 50, 50, 50), p_in=0.3, p_out=0.01, seed=42)

# 25,000 records and ~75k citations: 13 dense clusters over a sparse periphery
# of singletons, so the indegree >= 6 core holds 11 fronts of >= 50 papers.
FULL_SCALE_SPEC = SynthSpec(
    cluster_sizes=(600, 450, 400, 350, 300, 300, 250, 250, 200, 200, 200, 40, 30) + (1,) * 21430,
    p_in=0.08, p_out=0.00008, seed=7)

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    marker = getattr(report, "_acceptance", None)
    if marker is None:
        return
    if report.when == "call" or report.outcome != "passed":
        n, title = marker
        ok = report.outcome == "passed"
        prev = _ACCEPTANCE.get(n, (title, True))
        _ACCEPTANCE[n] = (title, prev[1] and ok)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        outcome.get_result()._acceptance = tuple(marker.args)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        title, ok = _ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}")


@pytest.fixture(scope="session")
def fixture_bytes():
    return (DATA / "fixture_10.txt").read_bytes()


@pytest.fixture(scope="session")
def fixture_expected():
    return json.loads((DATA / "fixture_10.expected.json").read_text())


@pytest.fixture(scope="session")
def fixture_records(fixture_bytes):
    return parse_export(fixture_bytes)


@pytest.fixture(scope="session")
def planted():
    """The 4 x 50 planted-partition corpus and its ground truth."""
    corpus, truth = generate(PLANTED_SPEC)
    return corpus, truth, parse_export(corpus)


def two_triangles():
    nodes = list("abcdef")
    edges = [("a", "b"), ("b", "c"), ("a", "c"), ("d", "e"), ("e", "f"), ("d", "f")]
    return nodes, edges


def bridged_triangles():
    nodes, edges = two_triangles()
    return nodes, edges + [("c", "d")]
