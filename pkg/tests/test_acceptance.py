"""The 18 acceptance criteria at full size, one PASS/FAIL line each.

Correctness verdicts come from ``fwkit.acceptance``; this module adds the
runtime limits and the cross-process reproducibility of ``selftest`` and
``run``.
"""
import os
import shutil
import subprocess
import sys
import time

import pytest

from fwkit.acceptance import CRITERIA, CheckResult, format_line


def _report(num, name, res: CheckResult, secs, limit):
    timing = "" if limit is None else f" [{secs:.4g}s, limit {limit:g}s]"
    print(f"\n{format_line(num, name, res)}{timing}")


@pytest.mark.parametrize("num,name,limit,check", [c for c in CRITERIA if c[0] != 18],
                         ids=[f"{c[0]:02d}-{c[1]}" for c in CRITERIA if c[0] != 18])
def test_criterion(num, name, limit, check):
    t0 = time.perf_counter()
    res = check(quick=False)
    wall = time.perf_counter() - t0
    secs = res.seconds if res.seconds is not None else wall
    ok = res.ok and secs < limit
    _report(num, name, CheckResult(ok, res.detail), secs, limit)
    assert res.ok, res.detail
    assert secs < limit, f"took {secs:.4g}s, limit {limit}s"


def _cli(*args, cwd):
    env = dict(os.environ, PYTHONHASHSEED="0")
    return subprocess.run([sys.executable, "-m", "fwkit", *args], cwd=cwd, env=env,
                          capture_output=True, check=False)


def test_criterion_18_reproducible_outputs(tmp_path):
    t0 = time.perf_counter()
    in_process = CRITERIA[17][3](quick=False)
    first = _cli("selftest", cwd=tmp_path)
    second = _cli("selftest", cwd=tmp_path)
    runs = []
    out = tmp_path / "run"
    for _ in range(2):
        if out.exists():
            shutil.rmtree(out)
        proc = _cli("run", "stochastic-quadratic", "--seed", "7", "--out", str(out), cwd=tmp_path)
        files = {p.name: p.read_bytes() for p in sorted(out.iterdir())}
        runs.append((proc.returncode, proc.stdout, files))
    secs = time.perf_counter() - t0
    selftest_same = first.returncode == 0 and first.stdout == second.stdout
    run_same = runs[0][0] == 0 and runs[0] == runs[1]
    ok = in_process.ok and selftest_same and run_same
    detail = (f"{in_process.detail} selftest_identical={selftest_same} "
              f"cli_run_identical={run_same} files={len(runs[0][2])}")
    _report(18, "reproducible-runs", CheckResult(ok, detail), secs, None)
    assert first.returncode == 0, first.stdout.decode() + first.stderr.decode()
    assert ok, detail
