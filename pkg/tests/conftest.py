"""Shared fixtures: an acceptance-criteria recorder printed after the run."""

import pytest

_ACCEPTANCE = []


def record_acceptance(name, passed, detail=""):
    _ACCEPTANCE.append((str(name), bool(passed), str(detail)))


@pytest.fixture
def acceptance():
    """Record one acceptance-criterion outcome for the terminal summary."""
    return record_acceptance


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _ACCEPTANCE:
        line = f"[{'PASS' if passed else 'FAIL'}] {name}"
        if detail:
            line += f": {detail}"
        terminalreporter.write_line(line)
