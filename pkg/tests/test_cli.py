import json
import subprocess
import sys

import numpy as np
import pytest

from cgcsurf import cli


def _cfg(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj, indent=2))
    return str(path)


def _diag(out):
    return json.loads((out / "diagnostics.json").read_text())


def test_solve_writes_run_directory(tmp_path):
    out = tmp_path / "solve"
    assert cli.main(["solve", "--grid", "33", "--out", str(out), "--quiet"]) == 0
    for name in ("config.json", "diagnostics.json", "solution.csv", "plotdata/radial.csv", "plotdata/levels.csv"):
        assert (out / name).exists(), name
    d = _diag(out)
    assert d["status"] == 0
    assert d["exact_error"] < 5e-3
    cfg = json.loads((out / "config.json").read_text())
    assert cfg["grid"] == 33 and cfg["command"] == "solve"


def test_solve_with_mesh(tmp_path):
    path = _cfg(tmp_path, "c.json", {"command": "solve", "grid": 33, "levels": 3, "R": 1.0, "mesh_grid": 17})
    out = tmp_path / "mesh"
    assert cli.main(["--config", path, "--out", str(out), "--quiet"]) == 0
    assert (out / "mesh.obj").read_text().startswith("v ")
    assert _diag(out)["curvature"]["sup_rel"] < 0.05


def test_reruns_are_bit_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert cli.main(["solve", "--grid", "33", "--out", str(out), "--quiet"]) == 0
    assert (a / "solution.csv").read_bytes() == (b / "solution.csv").read_bytes()


def test_wedge_is_rejected(tmp_path):
    path = _cfg(tmp_path, "w.json", {"command": "solve", "grid": 33, "phi": [[0, 0.0], [90, 0.0]]})
    out = tmp_path / "wedge"
    assert cli.main(["--config", path, "--out", str(out), "--quiet"]) == 2
    d = _diag(out)
    assert d["error"] == "Wedge" and "wedge" in d["message"]


def test_config_errors_report_lines(tmp_path, capsys):
    path = _cfg(tmp_path, "bad.json", {"command": "solve", "levels": 3, "grid": 4})
    assert cli.main(["--config", path, "--quiet"]) == 1
    err = capsys.readouterr().err
    assert f"{path}:4: grid" in err

    broken = tmp_path / "broken.json"
    broken.write_text('{\n  "command": "solve",\n  "grid": 33\n  "levels": 3\n}\n')
    assert cli.main(["--config", str(broken), "--quiet"]) == 1
    assert f"{broken}:4: invalid JSON" in capsys.readouterr().err

    extra = _cfg(tmp_path, "extra.json", {"command": "solve", "colour": "red"})
    assert cli.main(["--config", extra, "--quiet"]) == 1
    assert "colour" in capsys.readouterr().err


def test_bad_phi_and_command_conflict(tmp_path, capsys):
    path = _cfg(tmp_path, "phi.json", {"command": "solve", "phi": [[0, 1, 2]]})
    assert cli.main(["--config", path, "--quiet"]) == 1
    assert ":3: phi" in capsys.readouterr().err
    other = _cfg(tmp_path, "cmd.json", {"command": "verify"})
    assert cli.main(["solve", "--config", other, "--quiet"]) == 1


def test_phi_forms():
    assert len(cli.parse_phi("dense")) == 360
    assert np.all(cli.parse_phi({"dense": 0.5}).values == 0.5)
    phi = cli.parse_phi([[0, 0.0], [120, "inf"], [240, 1.0]])
    assert np.isinf(phi.values).sum() == 1
    with pytest.raises(ValueError):
        cli.parse_phi({"sparse": 1})


@pytest.mark.parametrize("kind", ["hyperboloid", "chord", "revolution", "trough"])
def test_barrier_command(tmp_path, kind):
    path = _cfg(tmp_path, "b.json", {"command": "barrier", "grid": 33, "mesh_grid": 17, "barrier": {"kind": kind}})
    out = tmp_path / kind
    assert cli.main(["--config", path, "--out", str(out), "--quiet"]) == 0
    assert _diag(out)["kind"] == kind
    assert (out / "solution.csv").exists()


def test_triangle_command(tmp_path):
    out = tmp_path / "tri"
    path = _cfg(tmp_path, "t.json", {"command": "triangle", "grid": 65, "levels": 4})
    assert cli.main(["--config", path, "--out", str(out), "--quiet"]) == 0
    d = _diag(out)
    assert d["edge_trace"]["max_abs"] < 1e-9
    assert d["cross_validation"]["samples"] >= 20
    assert (out / "bochner.csv").exists()


def test_foliate_command(tmp_path):
    out = tmp_path / "fol"
    path = _cfg(tmp_path, "f.json", {"command": "foliate", "grid": 33, "levels": 3, "K_list": [0.5, 2.0]})
    assert cli.main(["--config", path, "--out", str(out), "--quiet"]) == 0
    assert _diag(out)["ordered"]
    assert json.loads((out / "sweep.json").read_text())[0]["K"] == 0.5
    assert (out / "plotdata" / "margins.csv").exists()


def test_ktime_command(tmp_path):
    out = tmp_path / "kt"
    path = _cfg(tmp_path, "k.json", {"command": "ktime", "grid": 33, "levels": 3, "points": [[0, 0, 1.0]]})
    assert cli.main(["--config", path, "--out", str(out), "--quiet"]) == 0
    rows = (out / "ktime.csv").read_text().splitlines()
    assert rows[0] == "x1,x2,x3,K,tau" and len(rows) == 2


def test_ktime_outside_domain(tmp_path):
    out = tmp_path / "kt2"
    path = _cfg(tmp_path, "k.json", {"command": "ktime", "grid": 33, "levels": 3, "points": [[0, 0, -1.0]]})
    assert cli.main(["--config", path, "--out", str(out), "--quiet"]) == 2


def test_ktime_bracket_failure(tmp_path):
    out = tmp_path / "kt3"
    path = _cfg(tmp_path, "k.json", {"command": "ktime", "grid": 33, "levels": 3, "points": [[0, 0, 1.0]],
                                     "bracket": [1000.0, 2000.0]})
    assert cli.main(["--config", path, "--out", str(out), "--quiet"]) == 3
    assert _diag(out)["error"] == "BracketFailure"


def test_verify_command(tmp_path):
    out = tmp_path / "ver"
    assert cli.main(["verify", "--grid", "65", "--out", str(out), "--quiet"]) == 0
    d = _diag(out)
    assert d["all_passed"]
    assert {c["name"] for c in d["checks"]} >= {"lorentz", "wedge", "hyperboloid", "comparison"}


def test_console_entry_point(tmp_path):
    out = tmp_path / "sub"
    proc = subprocess.run([sys.executable, "-m", "cgcsurf.cli", "barrier", "--grid", "17", "--out", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "status 0" in proc.stdout
