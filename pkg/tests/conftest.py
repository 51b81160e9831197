"""Shared test fixtures and the acceptance summary printer."""

import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one acceptance-criterion verdict and assert it.

    The collected lines are printed in the terminal summary so a plain
    ``pytest`` run always shows one pass/fail line per criterion.
    """

    def record(num: int, name: str, ok: bool, detail: str = ""):
        status = "PASS" if ok else "FAIL"
        line = f"[{num:2d}] {status}  {name}"
        if detail:
            line += f"  ({detail})"
        ACCEPTANCE_LINES.append(line)
        assert ok, line
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.line(line)
