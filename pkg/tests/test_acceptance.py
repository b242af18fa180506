"""Acceptance criteria AC-1 to AC-11 at their stated tolerances and time budgets.

Each criterion's pass/fail line is printed in the terminal summary.
"""
import pytest

from hypervol import verify

ACCEPTANCE_LINES = {}


@pytest.mark.acceptance
@pytest.mark.parametrize("cid", list(verify.CRITERIA))
def test_criterion(cid):
    res = verify.run_criterion(cid, seed=0)
    ACCEPTANCE_LINES[cid] = res.line
    assert res.passed, f"{res.line}: {res.details}"
