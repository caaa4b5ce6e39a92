from __future__ import annotations

import pytest

from metaqa.model import OerRecord, QualityControl
from metaqa.profiler import canned_profile_set

W, O = QualityControl.WITH, QualityControl.WITHOUT

_acceptance_results: list[tuple[str, str, str]] = []


@pytest.fixture(scope="session")
def canned():
    return canned_profile_set()


@pytest.fixture
def tiny_corpus():
    return [
        OerRecord("u1", title="Intro to SQL", description="one two three four", subjects=("sql", "db"),
                  level="beginner", languages=("en",), quality_control=W),
        OerRecord("u2", title="Advanced joins in SQL", description="a b c d e f", subjects=("sql", "db", "joins", "x"),
                  level="advanced", time_required="PT2H", quality_control=W),
        OerRecord("u3", title="misc", quality_control=O),
    ]


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        _acceptance_results.append((marker.args[0], status, item.name))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for crit, status, name in sorted(_acceptance_results):
        terminalreporter.write_line(f"criterion {crit}: {status}  ({name})")
