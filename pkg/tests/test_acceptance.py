"""Acceptance suite: every criterion at its stated size and tolerance.

Each test prints one PASS/FAIL line (shown with ``-s``, and always collected
into the "acceptance criteria" section of the terminal summary).
"""

import pytest

from czic import verify

from conftest import ACCEPTANCE_LINES


def _run(number, **kw):
    fn = verify.CRITERIA[number - 1]
    res = fn(quick=False, workers=verify.default_workers(), **kw)
    assert res.number == number
    line = res.line()
    print(line)
    ACCEPTANCE_LINES.append(line)
    return res


@pytest.mark.parametrize("number", range(1, 12))
def test_criterion(number):
    res = _run(number)
    assert res.passed, res.line()
