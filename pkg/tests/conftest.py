"""Shared fixtures plus the acceptance-criteria summary.

Tests marked ``@pytest.mark.acceptance("<label>")`` get one PASS/FAIL line
per distinct label in the terminal summary; several tests may share a label,
and the label fails if any of them does.
"""

from __future__ import annotations

from pathlib import Path

import pytest

SAMPLE_DIR = Path(__file__).resolve().parent.parent / "sample_data"

_labels: dict[str, str] = {}
_results: dict[str, str] = {}


@pytest.fixture(scope="session")
def sample_corpus() -> Path:
    return SAMPLE_DIR / "corpus.csv"


@pytest.fixture(scope="session")
def sample_gazetteer() -> Path:
    return SAMPLE_DIR / "gazetteer.tsv"


@pytest.fixture(scope="session")
def sample_config() -> Path:
    return SAMPLE_DIR / "run.cfg"


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("acceptance")
        if marker and marker.args:
            _labels[item.nodeid] = marker.args[0]


def pytest_runtest_logreport(report):
    label = _labels.get(report.nodeid)
    if label is None:
        return
    outcome = None
    if report.when == "call":
        outcome = "PASS" if report.passed else "FAIL"
    elif not report.passed:
        # setup/teardown error counts against the criterion too
        outcome = "FAIL"
    if outcome is None:
        return
    if _results.get(label) == "FAIL":
        return
    _results[label] = outcome


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_results):
        terminalreporter.write_line(f"{_results[label]} {label}")
