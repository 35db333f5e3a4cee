"""The twelve acceptance criteria, one test each.

Every test prints ``criterion N: PASS|FAIL value=... tol=...`` straight to the
terminal (bypassing capture) so the report appears in ``pytest -v`` output.
"""
import pytest

from transmission_lab.acceptance import CRITERIA, run_criterion

SEED = 0


@pytest.mark.parametrize("cid", sorted(CRITERIA))
def test_criterion(cid, capsys):
    res = run_criterion(cid, seed=SEED)
    status = "PASS" if res.passed else "FAIL"
    with capsys.disabled():
        print(f"\ncriterion {cid}: {status} value={res.value:.3e} tol={res.tolerance:.1e} ({res.name}, {res.seconds:.1f} s)")
    assert res.passed, {k: v for k, v in res.parts.items()}
