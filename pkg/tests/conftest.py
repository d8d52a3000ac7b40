"""Shared fixtures and the acceptance summary hook.

Tests named test_criterion_* are the acceptance gate; one pass/fail line
per criterion is printed at the end of every run.
"""

from __future__ import annotations

import pytest

_ACCEPTANCE: dict[str, str] = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if not name.startswith("test_criterion_"):
        return
    if report.when == "call":
        _ACCEPTANCE[name] = "PASS" if report.passed else "FAIL"
    elif report.when == "setup" and report.failed:
        _ACCEPTANCE[name] = "ERROR"
    elif report.when == "setup" and report.skipped:
        _ACCEPTANCE[name] = "SKIP"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        label = name.removeprefix("test_criterion_")
        terminalreporter.write_line(f"{label}: {_ACCEPTANCE[name]}")
