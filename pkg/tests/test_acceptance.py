"""The eleven acceptance criteria at their stated tolerances.

Each criterion prints one ``[PASS]``/``[FAIL]`` line, collected into the
terminal summary as well.
"""
import subprocess
import sys

import pytest

from conftest import ACCEPTANCE_LINES
from thermogeo import acceptance


@pytest.mark.parametrize("check", acceptance.CHECKS, ids=lambda c: c.__name__)
def test_criterion(check):
    result = check()
    ACCEPTANCE_LINES[result.number] = result.line()
    print(result.line())
    assert result.passed, result.line()


def test_verify_command_is_deterministic(tmp_path):
    runs = [subprocess.run([sys.executable, "-m", "thermogeo.cli", "verify"], cwd=tmp_path,
                           capture_output=True, timeout=600) for _ in range(2)]
    for r in runs:
        assert r.returncode == 0, r.stdout.decode() + r.stderr.decode()
    out = runs[0].stdout.decode()
    assert out.count("[PASS]") == 11 and out.rstrip().endswith("11/11 checks passed")
    assert runs[0].stdout == runs[1].stdout
    line = "[PASS] 11 verify command: exit 0 twice, output byte-identical"
    ACCEPTANCE_LINES[11.5] = line
    print(line)


def test_crashing_check_is_reported_as_failure(monkeypatch):
    def boom():
        raise RuntimeError("broken")

    monkeypatch.setattr(acceptance, "CHECKS", (boom,))
    (res,) = acceptance.run_all()
    assert not res.passed and "RuntimeError" in res.line()
