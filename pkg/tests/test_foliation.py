import csv
import json
import math

import numpy as np
import pytest

from cgcsurf.errors import BracketFailure, NotRegular
from cgcsurf.foliation import (KTime, geometric_K_grid, k_sweep, k_time, k_time_from_run, plane_margin,
                               write_k_time_table)
from cgcsurf.regions import BoundaryFunction

N = 33
DENSE = BoundaryFunction.dense(0.0)


@pytest.fixture(scope="module")
def sweep():
    return k_sweep(DENSE, [0.25, 0.5, 1.0, 2.0, 4.0], n=N, levels=3)


def test_dense_margins_match_closed_form():
    run = k_sweep(DENSE, [4.0, 1.0], n=N, levels=3)
    assert run.K_list == (1.0, 4.0)
    m = run.margins[(0, 1)]
    assert m["ordered"]
    X, Y = run.solutions[0].u.mesh()
    core = X * X + Y * Y <= 0.81
    diff = run.solutions[1].u.values[core] - run.solutions[0].u.values[core]
    exact = 0.5 * np.sqrt(1 - X[core] ** 2 - Y[core] ** 2)
    assert np.abs(diff - exact).max() < 5e-3
    assert m["min_core"] == pytest.approx(0.5 * math.sqrt(1 - 0.95 ** 2), abs=0.03)


def test_sweep_is_ordered(sweep):
    assert all(m["ordered"] for m in sweep.margins.values())
    assert all(m["min_core"] > 0 for m in sweep.margins.values())
    assert len(sweep.margins) == 10
    rows = sweep.summary()
    assert [r["K"] for r in rows] == list(sweep.K_list)
    assert rows[-1]["ordering_margin"] is None


def test_meshes_ordered():
    run = k_sweep(DENSE, [1.0, 4.0], n=N, levels=3, R=1.0)
    f1, f4 = (m.heights for m in run.meshes)
    assert np.all(f1 >= f4 - 1e-6)
    X, Y = run.meshes[0].mesh()
    assert np.abs(f1 - np.sqrt(1 + X * X + Y * Y)).max() < 2e-2


def test_sweep_validation():
    with pytest.raises(ValueError):
        k_sweep(DENSE, [1.0, -1.0], n=N)
    with pytest.raises(ValueError):
        k_sweep(DENSE, [1.0, 1.0], n=N)


def test_plane_margin_sign(sweep):
    sol = sweep.solutions[2]  # K = 1, u = -sqrt(1 - |x|^2)
    assert plane_margin(sol, (0.0, 0.0, 2.0)) > 0  # above the hyperboloid
    assert plane_margin(sol, (0.0, 0.0, 0.5)) < 0


def test_k_time_from_run(sweep):
    heights = np.linspace(0.6, 1.9, 10)
    taus = []
    for t in heights:
        K = k_time_from_run(sweep, (0.0, 0.0, t))
        assert K == pytest.approx(1 / t ** 2, rel=0.1)
        taus.append(1 / K)
    assert np.all(np.diff(taus) > 0)
    with pytest.raises(BracketFailure):
        k_time_from_run(sweep, (0.0, 0.0, 5.0))


def test_k_time_on_axis():
    res = k_time(DENSE, (0.0, 0.0, 1.0), tol=1e-4, n=N, levels=3)
    assert res.K == pytest.approx(1.0, rel=5e-3)
    assert res.tau == pytest.approx(1 / res.K)
    assert abs(res.margin) < 1e-3


def test_k_time_errors():
    with pytest.raises(NotRegular):
        k_time(DENSE, (0.0, 0.0, -1.0), n=N, levels=3)
    with pytest.raises(BracketFailure):
        k_time(DENSE, (0.0, 0.0, 1.0), K_bracket=(1000.0, 2000.0), n=N, levels=3)


def test_outputs(sweep, tmp_path):
    path = tmp_path / "sweep.json"
    sweep.write_summary(path)
    data = json.loads(path.read_text())
    assert [d["K"] for d in data] == list(sweep.K_list)
    rows = [KTime((0.0, 0.0, 1.0), 1.0, 1.0, 0.0, 3, ()), KTime((0.1, 0.0, 2.0), 0.25, 4.0, 0.0, 4, ())]
    table = tmp_path / "ktime.csv"
    write_k_time_table(rows, table)
    with open(table) as fh:
        got = list(csv.reader(fh))
    assert got[0] == ["x1", "x2", "x3", "K", "tau"]
    assert float(got[2][4]) == 4.0


def test_geometric_grid():
    g = geometric_K_grid(0.25, 4.0, factor=2.0)
    assert g == pytest.approx([0.25, 0.5, 1.0, 2.0, 4.0])
