"""Shared fixtures and the per-criterion acceptance report."""

from __future__ import annotations

from pathlib import Path

import pytest

_RESULTS: dict[str, list[str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    name = marker.args[0]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _RESULTS.setdefault(name, []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcomes in _RESULTS.items():
        verdict = "PASS" if all(o == "passed" for o in outcomes) else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name}  ({len(outcomes)} checks)")


@pytest.fixture
def spec_file(tmp_path: Path):
    """Write a spec list to a file and return its path as a string."""

    def write(pairs, name: str = "specs.txt") -> str:
        path = tmp_path / name
        path.write_text("".join(f"{a!r},{c!r}\n" for a, c in pairs), encoding="utf-8")
        return str(path)

    return write
