import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fwkit.cli import EXIT_CONFIG, EXIT_ERROR, EXIT_NUMERIC, EXIT_OK, main
from fwkit.core import ConfigError, RunTrace
from fwkit.experiments import (BUILTINS, dump_config, format_value, list_experiments,
                               parse_config_text, parse_value, resolve_config, run_experiment)


@pytest.mark.parametrize("text,value", [
    ("3", 3), ("2.5", 2.5), ("1e-7", 1e-7), ("true", True), ("off", False), ("none", None),
    ("fw, afw", ["fw", "afw"]), ("1 2; 3 4", [[1, 2], [3, 4]]), ("linesearch", "linesearch"),
])
def test_parse_value(text, value):
    assert parse_value(text) == value


@given(st.one_of(st.integers(-10 ** 6, 10 ** 6), st.floats(allow_nan=False, allow_infinity=False),
                 st.booleans(), st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=2, max_size=5)))
def test_format_then_parse_roundtrips(v):
    assert parse_value(format_value(v)) == v


def test_config_text_and_dump_roundtrip():
    cfg = parse_config_text("# hi\nexperiment = scalar-quadratic\nmax_iters = 10  # short\n")
    assert cfg == {"experiment": "scalar-quadratic", "max_iters": 10}
    assert parse_config_text(dump_config(cfg)) == cfg


@pytest.mark.parametrize("text,needle", [("max_iters 10", "expected 'key = value'"),
                                         (" = 3", "empty key")])
def test_config_syntax_errors(text, needle):
    with pytest.raises(ConfigError, match=needle):
        parse_config_text(text)


@pytest.mark.parametrize("overrides,needle", [
    ({"max_iter": 5}, "max_iter: unknown field; did you mean: max_iters"),
    ({"max_iters": 0}, "max_iters: must be a positive integer"),
    ({"tol": -1.0}, "tol: must be a positive number"),
    ({"runs": ["fw", "afww"]}, "did you mean: afw"),
    ({"step.kind": "golden"}, "step:"),
    ({"objective.kind": "cubic"}, "objective.kind: unknown kind"),
])
def test_validation_names_the_field(overrides, needle):
    with pytest.raises(ConfigError, match=needle):
        resolve_config("zigzag-triangle", overrides)


def test_unknown_experiment_suggests():
    with pytest.raises(ConfigError, match="did you mean: scalar-quadratic"):
        resolve_config("scalar-quadratc")


def test_catalog_lists_every_builtin():
    assert sorted(n for n, _ in list_experiments()) == sorted(BUILTINS)


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_builtins_resolve(name):
    cfg = resolve_config(name)
    assert cfg["experiment"] == name


def test_run_writes_traces_summary_and_config(tmp_path):
    cfg = resolve_config("zigzag-triangle", {"max_iters": 30})
    traces, summary = run_experiment(cfg, tmp_path)
    files = sorted(p.name for p in tmp_path.iterdir())
    assert "summary.txt" in files and "config.resolved.txt" in files
    assert {f"{lbl}_seed0.csv" for lbl in cfg["runs"]} <= set(files)
    tr = RunTrace.from_csv((tmp_path / "fw_seed0.csv").read_text())
    assert len(tr) == len(traces[("fw", 0)])
    assert parse_config_text((tmp_path / "config.resolved.txt").read_text())["max_iters"] == 30
    assert summary == (tmp_path / "summary.txt").read_text()


def test_scalar_experiment_checks_pass(tmp_path):
    _, summary = run_experiment(resolve_config("scalar-quadratic"), tmp_path)
    assert "check.fw.seed0.closed_form = pass" in summary


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["list", "--names"]) == EXIT_OK
    assert "scalar-quadratic" in capsys.readouterr().out.split()
    assert main(["run", "nope"]) == EXIT_CONFIG
    assert main(["run", "scalar-quadratic", "--set", "bogus.key=1"]) == EXIT_CONFIG
    assert main(["run", "scalar-quadratic", "--out", str(tmp_path), "--max-iters", "5"]) == EXIT_OK
    with pytest.raises(SystemExit) as exc:
        main(["run"])
    assert exc.value.code == EXIT_CONFIG


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_cli_numeric_failure_exit_code(tmp_path):
    cfg = tmp_path / "overflow.cfg"
    # gradients at the box corners overflow to inf
    cfg.write_text("runs = fw\nobjective.kind = sq_norm\nregion.kind = box\n"
                   "region.lower = -1e308, -1e308\nregion.upper = 1e308, 1e308\n"
                   f"out = {tmp_path / 'out'}\n")
    assert main(["run", str(cfg)]) == EXIT_NUMERIC


def test_cli_library_error_exit_code(tmp_path):
    cfg = tmp_path / "singular.cfg"
    # two design points cannot span three dimensions
    cfg.write_text("experiment = dopt-gaussian\nobjective.points = 2\nregion.n = 2\n"
                   f"objective.dim = 3\nout = {tmp_path / 'out'}\n")
    assert main(["run", str(cfg)]) == EXIT_ERROR


def test_config_file_with_overrides(tmp_path):
    cfg = tmp_path / "my.cfg"
    cfg.write_text("experiment = zigzag-triangle\nruns = fw, afw\nmax_iters = 20\n"
                   f"out = {tmp_path / 'o'}\n")
    assert main(["run", str(cfg), "--seed", "3"]) == EXIT_OK
    assert (tmp_path / "o" / "afw_seed3.csv").is_file()


def test_module_entry_point_runs():
    out = subprocess.run([sys.executable, "-m", "fwkit", "list"], capture_output=True, text=True)
    assert out.returncode == 0 and "meb-random" in out.stdout
