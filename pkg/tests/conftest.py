import os

import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_ACCEPTANCE = []


@pytest.fixture
def acceptance():
    """Record one acceptance line; the summary is printed at session end."""

    def record(criterion: str, name: str, passed: bool, detail: str = ""):
        line = f"{'PASS' if passed else 'FAIL'}  [{criterion}] {name}"
        if detail:
            line += f"  ({detail})"
        _ACCEPTANCE.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in _ACCEPTANCE:
        terminalreporter.write_line(line)
    failed = sum(1 for l in _ACCEPTANCE if l.startswith("FAIL"))
    terminalreporter.write_line(f"{len(_ACCEPTANCE) - failed} passed, {failed} failed")
