from __future__ import annotations

import pytest

from xzero.coding import SigmaRegistry
from xzero.params import TINY

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def p():
    return TINY


@pytest.fixture
def reg():
    return SigmaRegistry(TINY)


@pytest.fixture
def criterion():
    """record(n, ok, detail): print the PASS/FAIL line and assert."""
    def record(n: int, ok: bool, detail: str = ""):
        line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
        ACCEPTANCE_LINES[n] = line
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
