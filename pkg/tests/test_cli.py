import json
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from gpequi.cli import main


def run(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "gpequi", *args], capture_output=True, text=True, cwd=cwd)


def cli_schema():
    return json.loads(resources.files("gpequi").joinpath("data/schemas/cli-output.json").read_text())


def test_eval_single_point(capsys):
    assert main(["eval", "[sqrt(2)*n^2]", "--n", "3"]) == 0
    assert capsys.readouterr().out.strip() == "12"


def test_eval_range_json(capsys):
    assert main(["eval", "[sqrt(2)*n]", "--M", "1", "--N", "5", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    jsonschema.validate(doc, cli_schema())
    assert doc["command"] == "eval"


@pytest.mark.parametrize("args", [["eval", "[n"], ["eval"], ["nosuch"], ["scenario", "no-such-scenario"]])
def test_usage_errors_exit_1(args):
    r = run(*args)
    assert r.returncode == 1
    assert r.stderr


def test_parse_error_shows_grammar():
    r = run("eval", "sqrt(n)", "--n", "1")
    assert r.returncode == 1 and "expr" in r.stderr


def test_failing_check_exits_2():
    r = run("identity-check", "id6-corrupted", "--trials", "50")
    assert r.returncode == 2
    assert json.loads(r.stdout)["pass"] is False


def test_identity_check_passes():
    r = run("identity-check", "id7", "--trials", "1000")
    assert r.returncode == 0
    doc = json.loads(r.stdout)
    jsonschema.validate(doc, cli_schema())
    assert doc["pass"] is True


def test_scenario_output_validates():
    r = run("scenario", "ex6.27c")
    assert r.returncode == 0, r.stderr
    doc = json.loads(r.stdout)
    jsonschema.validate(doc, cli_schema())
    assert doc["result"]["anchor"]
    assert all(c["provenance"] in ("PAPER", "DERIVED", "TRIVIAL") for c in doc["result"]["checks"])


def test_scenario_list():
    r = run("scenario", "list")
    assert r.returncode == 0 and "floor-shift-sqrt11" in r.stdout


def test_byte_identical_runs():
    args = ("ud", "n^2", "--lam", "sqrt(2)", "--N", "3000")
    a, b = run(*args), run(*args)
    assert a.returncode == 0 and a.stdout == b.stdout


def test_plot_files(tmp_path):
    out = tmp_path / "plots"
    r = run("wd", "n", "--lam", "sqrt(2)", "--N", "2000", "--window", "400", "--emit-plot-data", str(out))
    assert r.returncode == 0, r.stderr
    names = {p.name for p in out.iterdir()}
    assert {"wd_windows.csv", "wd_windows.png"} <= names
    header = (out / "wd_windows.csv").read_text().splitlines()[0]
    assert header == "start,discrepancy"
    first = (out / "wd_windows.png").read_bytes()
    run("wd", "n", "--lam", "sqrt(2)", "--N", "2000", "--window", "400", "--emit-plot-data", str(out))
    assert (out / "wd_windows.png").read_bytes() == first


def run_env(env_bits, *args):
    import os
    env = dict(os.environ, GPEQUI_MAX_BITS=str(env_bits))
    return subprocess.run([sys.executable, "-m", "gpequi", *args], capture_output=True, text=True, env=env)


def test_max_bits_flag_beats_env():
    args = ("eval", "[sqrt(2)*n]", "--n", "3", "--format", "json")
    assert json.loads(run_env(512, *args).stdout)["config"]["max_bits"] == 512
    assert json.loads(run_env(512, *args, "--max-bits", "4096").stdout)["config"]["max_bits"] == 4096


def test_precision_exhausted_exits_1():
    r = run("eval", "[sqrt(2)*n - sqrt(2)*n]", "--n", "3", "--max-bits", "1024")
    assert r.returncode == 1 and "max-bits" in r.stderr
