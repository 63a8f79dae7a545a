"""Acceptance criteria, each run at its stated tolerance and time limit.

Each test prints one PASS/FAIL line; the lines are also collected and shown
in the terminal summary (see conftest.py), or use ``shatterkit verify``.
"""

import pytest

from conftest import CRITERION_LINES
from shatterkit.suites import CRITERIA, run_suite

NUMBERED = list(enumerate(CRITERIA, start=1))


@pytest.mark.parametrize("number,name", NUMBERED, ids=[f"{k:02d}-{n}" for k, n in NUMBERED])
def test_criterion(number, name):
    result = run_suite(name)
    line = f"criterion {number:2d} {result.line()}"
    CRITERION_LINES.append(line)
    print("\n" + line)
    assert result.passed, result.summary
