"""All twelve acceptance criteria at full size with seed 1.

Each criterion prints one line (visible even when pytest captures output):

    [PASS] #n name: value=... threshold=... runtime=...s budget=...s
"""

import pytest

from holonomy_lab.harness.acceptance import CRITERIA, run_criterion

SEED = 1


@pytest.mark.slow
@pytest.mark.parametrize("criterion", CRITERIA, ids=lambda c: f"criterion{c.number:02d}")
def test_acceptance(criterion, capsys):
    rep, dt = run_criterion(criterion, seed=SEED)
    ok = rep.passed and dt <= criterion.budget
    line = (f"[{'PASS' if ok else 'FAIL'}] #{criterion.number} {rep.name}: value={float(rep.value):.6g} "
            f"threshold={float(rep.threshold):.6g} runtime={dt:.1f}s budget={criterion.budget:.0f}s")
    with capsys.disabled():
        print("\n" + line)
        if rep.detail:
            print(f"    detail: {rep.detail}")
    assert rep.passed, line
    assert dt <= criterion.budget, f"runtime {dt:.1f}s exceeds budget {criterion.budget}s"
