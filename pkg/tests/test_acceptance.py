"""Acceptance criteria, one PASS/FAIL line each (run with -s to see them)."""

import pytest

from discrete_canonical import acceptance


@pytest.mark.parametrize("number,title,fn", acceptance.CRITERIA, ids=[f"c{n:02d}" for n, _, _ in acceptance.CRITERIA])
def test_criterion(number, title, fn, capsys):
    res = acceptance.run_criterion(number)
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.detail
