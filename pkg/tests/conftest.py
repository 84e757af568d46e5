"""Collects acceptance outcomes and prints one verdict line per criterion."""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_OUTCOMES: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    report = outcome.get_result()
    number, title = marker.args
    entry = _OUTCOMES.setdefault(number, {"title": title, "passed": True, "seen": False})
    if report.when == "call" or report.failed:
        entry["seen"] = True
        entry["passed"] = entry["passed"] and report.passed


def pytest_terminal_summary(terminalreporter):
    seen = {n: e for n, e in sorted(_OUTCOMES.items()) if e["seen"]}
    if not seen:
        return
    terminalreporter.section("acceptance criteria")
    for number, entry in seen.items():
        verdict = "PASS" if entry["passed"] else "FAIL"
        terminalreporter.write_line(f"[{verdict}] criterion {number}: {entry['title']}")
