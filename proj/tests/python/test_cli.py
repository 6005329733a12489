import filecmp
import json
import os
import subprocess

import pytest

CLI = os.environ.get("GLIL_CLI", "glil")


def run(args, tmp_path, env=None):
    full_env = dict(os.environ)
    full_env.update(env or {})
    return subprocess.run([CLI, *args], cwd=tmp_path, env=full_env, capture_output=True, text=True)


def test_solve_square(tmp_path):
    r = run(["solve", "--payoff", "square", "--band", "0.5,1.0", "--out", "o"], tmp_path)
    assert r.returncode == 0, r.stderr
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert manifest["results"]["upper"] == pytest.approx(1.0, abs=1e-3)
    assert manifest["results"]["lower"] == pytest.approx(0.25, abs=1e-3)
    assert manifest["config"]["payoff"] == "square"
    assert (tmp_path / "o" / "value_function.csv").exists()


def test_solve_degenerate_band(tmp_path):
    r = run(["solve", "--payoff", "relu", "--band", "1,1", "--out", "o", "--format", "json"], tmp_path)
    assert r.returncode == 0, r.stderr
    results = json.loads((tmp_path / "o" / "manifest.json").read_text())["results"]
    assert results["upper"] == pytest.approx(0.3989, abs=1e-3)
    assert results["lower"] == pytest.approx(0.3989, abs=1e-3)


@pytest.mark.parametrize(
    "args, message",
    [
        (["solve", "--band", "1.0,0.5"], "sigma_lo <= sigma_hi"),
        (["lil", "--N", "2", "--master-seed", "1"], "at least 3"),
        (["lil", "--N", "1e6"], "--master-seed"),
        (["dual", "--sandwich"], "--master-seed"),
        (["solve", "--grid", "8,0.02,0.001"], "CFL"),
        (["solve", "--payoff", "cube"], "unknown payoff"),
        (["capacity"], "at least one"),
        (["solve", "--format", "xml"], ""),
        (["nonsense"], ""),
    ],
)
def test_config_errors_exit_2(tmp_path, args, message):
    r = run(args, tmp_path)
    assert r.returncode == 2
    assert message in r.stderr


def test_capacity_commands(tmp_path):
    r = run(["capacity", "--bc2", "--p", "0.5", "--M", "20", "--out", "o"], tmp_path)
    assert r.returncode == 0, r.stderr
    rows = (tmp_path / "o" / "bc_divergent.csv").read_text().splitlines()
    assert rows[1].split(",")[3] == "9.5367431640625e-07"
    r = run(["capacity", "--axioms", "--duality", "--random-models", "20", "--master-seed", "4", "--out", "p"],
            tmp_path)
    assert r.returncode == 0, r.stderr
    manifest = json.loads((tmp_path / "p" / "manifest.json").read_text())
    assert manifest["results"]["duality_max_residual"] < 1e-12


def test_dual_lemma5_equality_row(tmp_path):
    r = run(["dual", "--lemma5", "--b", "0", "--out", "o"], tmp_path)
    assert r.returncode == 0, r.stderr
    header, row = (tmp_path / "o" / "lemma5_lemma7_phi_1_1.csv").read_text().splitlines()
    fields = dict(zip(header.split(","), row.split(",")))
    assert fields["lhs"] == fields["rhs"]


def test_config_file_and_flag_precedence(tmp_path):
    (tmp_path / "run.toml").write_text('band = "1,1"\n[solve]\npayoff = "abs"\n')
    r = run(["--config", "run.toml", "solve", "--out", "o"], tmp_path)
    assert r.returncode == 0, r.stderr
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert manifest["config"]["band"] == "1,1"
    assert manifest["config"]["payoff"] == "abs"
    r = run(["--config", "run.toml", "solve", "--payoff", "relu", "--out", "p"], tmp_path)
    assert json.loads((tmp_path / "p" / "manifest.json").read_text())["config"]["payoff"] == "relu"


def test_verdict_failure_exits_4(tmp_path):
    # one step of size sigma lands outside the bump's support, so the discrete
    # value is 0 while the PDE value is about 0.19: the gap check must fail
    r = run(["dual", "--clt", "--payoff", "lemma7_phi(1,1)", "--n", "1", "--out", "o"], tmp_path)
    assert r.returncode == 4
    assert "FAIL clt:lemma7_phi" in r.stdout
    assert json.loads((tmp_path / "o" / "manifest.json").read_text())["pass"] is False


def test_reruns_are_byte_identical_across_threads(tmp_path):
    args = ["lil", "--cluster", "--b", "0.2", "--N", "20000", "--seeds", "1,2", "--master-seed", "9"]
    a = run([*args, "--out", "a"], tmp_path, {"GLIL_THREADS": "1"})
    b = run([*args, "--out", "b"], tmp_path, {"GLIL_THREADS": "3"})
    assert a.returncode == b.returncode
    assert a.returncode in (0, 4)
    files = json.loads((tmp_path / "a" / "manifest.json").read_text())["files"]
    match, mismatch, errors = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b", files, shallow=False)
    assert not mismatch and not errors and len(match) == len(files)
