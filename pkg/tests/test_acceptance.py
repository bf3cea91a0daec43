"""All twelve acceptance criteria at their stated tolerances.

Each criterion prints one PASS/FAIL line; the collected lines are repeated
in the terminal summary (see conftest.py).
"""

import json

import pytest

from kgdecay.acceptance import CRITERIA, ORDER, run_criterion

RESULTS = []


@pytest.mark.slow
@pytest.mark.parametrize("cid", ORDER, ids=[f"criterion_{c:02d}" for c in ORDER])
def test_criterion(cid):
    res = run_criterion(cid, seed=0)
    RESULTS.append(res.line())
    print(res.line())
    detail = res.error or json.dumps(res.to_dict()["details"], default=str)[:2000]
    assert res.passed, f"{CRITERIA[cid][0]}: {detail}"
