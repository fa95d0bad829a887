from __future__ import annotations

from pathlib import Path

import pytest

from shopagent.catalog import ingest_catalog
from shopagent.embeddings import build_vector_index, embed_text
from shopagent.llm import StubBackend, load_stub_script
from shopagent.service.state import default_stub_script_path

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def catalog_path() -> Path:
    return FIXTURES / "catalog_500.jsonl"


@pytest.fixture(scope="session")
def catalog(catalog_path):
    handle, report = ingest_catalog(catalog_path)
    assert report.accepted == 500 and not report.rejected
    return handle


@pytest.fixture(scope="session")
def vindex(catalog):
    return build_vector_index(catalog, embed_text)


@pytest.fixture(scope="session")
def demo_script():
    return load_stub_script(default_stub_script_path())


@pytest.fixture()
def stub_backend(demo_script):
    return StubBackend(demo_script)


# One visible pass/fail line per acceptance criterion at the end of the run.
_acceptance_outcomes: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _acceptance_outcomes.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_outcomes:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, outcome in _acceptance_outcomes:
        verdict = "PASS" if outcome == "passed" else outcome.upper()
        terminalreporter.write_line(f"{name}: {verdict}")
