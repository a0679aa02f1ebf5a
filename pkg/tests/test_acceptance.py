"""Acceptance criteria, one test each, at their stated tolerances.

Every test prints a single PASS/FAIL line (outside pytest's capture).
"""

import json
import subprocess
import sys

import pytest

from starpath import acceptance
from starpath.acceptance import CriterionResult


def report(capsys, result: CriterionResult):
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()


@pytest.mark.parametrize("check", acceptance.CHECKS, ids=lambda c: c.__name__)
def test_criterion(check, capsys):
    report(capsys, check())


def _selftest_report(outdir):
    proc = subprocess.run(
        [sys.executable, "-m", "starpath", "selftest", "--no-determinism", "--output", str(outdir)],
        capture_output=True,
        text=True,
        timeout=600,
    )
    assert proc.returncode == 0, proc.stdout + proc.stderr
    obj = json.loads((outdir / "selftest.json").read_text())
    obj.pop("timing_seconds")
    return json.dumps(obj, sort_keys=True).encode()


def test_determinism(tmp_path, capsys):
    a = _selftest_report(tmp_path / "a")
    b = _selftest_report(tmp_path / "b")
    same = a == b
    report(
        capsys,
        CriterionResult(10, "selftest reports byte-identical", same, 0.0 if same else 1.0, 0.0),
    )
