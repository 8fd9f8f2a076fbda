import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from obstaclelab import cli

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"


def run(args, tmp_path):
    return cli.main([*args, "--out", str(tmp_path)])


def test_frequency_of_vhat_config(tmp_path):
    assert run(["frequency", "--config", str(CONFIGS / "frequency_vhat.cfg")], tmp_path) == 0
    data = json.loads((tmp_path / "frequency.json").read_text())
    assert data["schema"] == "obstaclelab.frequency/1"
    assert all(abs(v - 1.5) <= 1e-3 for v in data["values"])
    lines = (tmp_path / "frequency.csv").read_text().splitlines()
    assert lines[0] == "r,value" and len(lines) == 5


def test_flags_override_config(tmp_path):
    code = run(["doubling", "--config", str(CONFIGS / "doubling_vhat.cfg"), "--radii", "3"], tmp_path)
    assert code == 0
    data = json.loads((tmp_path / "doubling.json").read_text())
    assert data["radii"] == [3.0]
    assert data["values"][0] == pytest.approx(8.0, abs=1e-8)


def test_harmonic_sampler_flag(tmp_path):
    assert run(["frequency", "--sampler", "harmonic", "--radii", "0.5,1"], tmp_path) == 0
    vals = json.loads((tmp_path / "frequency.json").read_text())["values"]
    assert vals == pytest.approx([2.0, 2.0], abs=1e-8)


@pytest.mark.parametrize("args,field", [
    (["frequency", "--n-angular", "8"], "n_angular"),
    (["frequency", "--radii", "2,1"], "radii"),
    (["frequency", "--gamma", "abc"], "gamma"),
    (["solve", "--omega", "2.5"], "omega"),
    (["potential", "--abs-tol", "nan"], "abs_tol"),
    (["frequency", "--sampler", "thin", "--thin-kind", "nope"], "thin_kind"),
    (["acf", "--modes", "1,1"], "starts"),
])
def test_invalid_input_exits_one(args, field, tmp_path, capsys):
    assert run(args, tmp_path) == 1
    assert field in capsys.readouterr().err


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("sampler = vhat\nradius = 1\n")
    assert run(["frequency", "--config", str(cfg)], tmp_path) == 1
    assert "radius" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert run(["frequency", "--config", str(tmp_path / "absent.cfg")], tmp_path) == 1


def test_nonconvergence_exits_two(tmp_path, capsys):
    args = ["solve", "--xmin", "-1", "--xmax", "1", "--ymin", "-1", "--ymax", "1",
            "--h", "0.1", "--max-iter", "1", "--tol", "1e-12"]
    assert run(args, tmp_path) == 2
    diag = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert diag["error"] == "NonConvergenceError" and diag["iterations"] == 1
    assert json.loads((tmp_path / "error.json").read_text()) == diag


def test_degenerate_exits_two(tmp_path):
    assert run(["frequency", "--sampler", "harmonic", "--scale", "0"], tmp_path) == 2
    assert (tmp_path / "error.json").exists()


def test_match_recovers_opening(tmp_path):
    assert run(["match", "--config", str(CONFIGS / "match_gamma2.cfg")], tmp_path) == 0
    data = json.loads((tmp_path / "match.json").read_text())
    assert data["gamma"] == pytest.approx(2.0, rel=0.05)


@pytest.mark.parametrize("name", ["frequency_vhat", "doubling_vhat", "acf_thirds"])
def test_reruns_are_byte_identical(name, tmp_path):
    cmd = name.split("_")[0]
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run([cmd, "--config", str(CONFIGS / f"{name}.cfg")], d) == 0
    files = sorted(os.listdir(a))
    assert files == sorted(os.listdir(b)) and files
    for f in files:
        assert (a / f).read_bytes() == (b / f).read_bytes()


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "obstaclelab.cli", "frequency", "--radii", "1",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "frequency.csv").exists()
