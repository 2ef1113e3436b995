import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cgcsurf.barriers import (Chord, canonical_chord_barrier, chord_barrier_values, hyperboloid_mesh,
                              hyperboloid_support, hyperboloid_values, revolution_F, revolution_profile,
                              revolution_surface, trough_mesh, trough_values)
from cgcsurf.fields import grid_axis


def _F_oracle(a):
    mpmath.mp.dps = 30
    a = mpmath.mpf(a)
    body = mpmath.quad(lambda t: mpmath.sqrt(1 + (a * mpmath.sinh(t)) ** 2) - a * mpmath.sinh(t),
                       [0, 1, 5, 20, mpmath.inf])
    return float(body - a)


def _fd_det(U, h):
    uxx = (U[2:, 1:-1] - 2 * U[1:-1, 1:-1] + U[:-2, 1:-1]) / h ** 2
    uyy = (U[1:-1, 2:] - 2 * U[1:-1, 1:-1] + U[1:-1, :-2]) / h ** 2
    uxy = (U[2:, 2:] - U[2:, :-2] - U[:-2, 2:] + U[:-2, :-2]) / (4 * h * h)
    return uxx * uyy - uxy ** 2


# hyperboloid ---------------------------------------------------------------------

def test_hyperboloid_values():
    assert hyperboloid_values(0.0, 0.0) == pytest.approx(-1.0)
    assert hyperboloid_values(0.6, 0.0, K=4.0) == pytest.approx(-0.4)
    assert hyperboloid_values(1.0, 0.0) == 0.0
    assert math.isinf(hyperboloid_values(1.1, 0.0))


def test_hyperboloid_bad_K():
    with pytest.raises(ValueError):
        hyperboloid_values(0.0, 0.0, K=0.0)


@pytest.mark.parametrize("K", [0.5, 1.0, 3.0])
def test_hyperboloid_mesh_curvature(K):
    mesh = hyperboloid_mesh(K, R=2.0, n=129)
    inner = mesh.curvature[2:-2, 2:-2]
    assert np.abs(inner / K - 1).max() < 0.02
    assert mesh.is_spacelike()


def test_hyperboloid_discrete_ma_second_order():
    errs = []
    for n in (65, 129):
        ax = grid_axis(n)
        X, Y = np.meshgrid(ax, ax, indexing="ij")
        U = np.nan_to_num(hyperboloid_values(X, Y), posinf=0.0)
        det = _fd_det(U, ax[1] - ax[0])
        Xi, Yi = X[1:-1, 1:-1], Y[1:-1, 1:-1]
        core = Xi ** 2 + Yi ** 2 <= 0.25
        exact = (1 - Xi ** 2 - Yi ** 2) ** -2
        errs.append(np.abs(det[core] - exact[core]).max())
    assert errs[1] < errs[0] / 3


def test_hyperboloid_support_field():
    f = hyperboloid_support(2.0, n=33)
    assert f.sample(0.0, 0.0) == pytest.approx(-1 / math.sqrt(2))
    assert f.meta["barrier"] == "hyperboloid"


# chord barrier -------------------------------------------------------------------

def test_canonical_chord_values():
    assert canonical_chord_barrier(1.0, 0.0) == pytest.approx(0.0, abs=1e-12)
    assert canonical_chord_barrier(0.5, 0.0) == pytest.approx(-0.65848, abs=5e-6)
    assert canonical_chord_barrier(0.0, 0.3) == 0.0
    assert math.isinf(canonical_chord_barrier(-0.1, 0.0))


@settings(max_examples=60, deadline=None)
@given(st.floats(0.02, 0.98), st.floats(-0.98, 0.98))
def test_canonical_chord_matches_closed_form(x, y):
    if x * x + y * y >= 0.999:
        return
    mpmath.mp.dps = 30
    exact = float(-x * mpmath.atanh(mpmath.sqrt(1 - mpmath.mpf(x) ** 2 / (1 - mpmath.mpf(y) ** 2))))
    assert canonical_chord_barrier(x, y) == pytest.approx(exact, rel=1e-9, abs=1e-12)


def test_canonical_chord_ma_equation():
    n = 129
    ax = grid_axis(n)
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    U = canonical_chord_barrier(X, Y)
    det = _fd_det(np.where(np.isfinite(U), U, 0.0), ax[1] - ax[0])
    Xi, Yi = X[1:-1, 1:-1], Y[1:-1, 1:-1]
    core = (Xi > 0.2) & (Xi ** 2 + Yi ** 2 < 0.6)
    exact = (1 - Xi ** 2 - Yi ** 2) ** -2
    assert np.abs(det[core] / exact[core] - 1).max() < 0.02


def test_chord_barrier_vanishes_on_chord():
    chord = Chord.from_angles(math.radians(-60), math.radians(80))
    m, c = chord.normal
    for s in np.linspace(0.05, 0.95, 7):
        pt = (1 - s) * np.asarray(chord.p) + s * np.asarray(chord.q)
        assert abs(chord_barrier_values(pt[0], pt[1], 1.0, chord)) < 1e-9
    # strictly negative inside, infinite on the far side
    inner = c * m + 0.3 * m
    assert chord_barrier_values(*inner, 1.0, chord) < 0
    outer = c * m - 0.2 * m
    assert math.isinf(chord_barrier_values(*outer, 1.0, chord))


def test_chord_barrier_diameter_is_canonical():
    chord = Chord((0.0, -1.0), (0.0, 1.0))
    # diameter oriented upward has the half-disk {x < 0} on its left
    assert chord_barrier_values(-0.5, 0.0, 1.0, chord) == pytest.approx(canonical_chord_barrier(0.5, 0.0))


def test_chord_validation():
    with pytest.raises(ValueError):
        Chord((1.0, 0.0), (1.0, 0.0))
    with pytest.raises(ValueError):
        Chord((0.5, 0.0), (0.0, 1.0))


# revolution surfaces ----------------------------------------------------------------

@pytest.mark.parametrize("a", [0.05, 0.3, 0.5, 0.9])
def test_F_against_quadrature(a):
    assert revolution_F(a) == pytest.approx(_F_oracle(a), abs=1e-9)


def test_F_endpoint_and_order():
    assert revolution_F(1.0) == pytest.approx(0.0, abs=1e-12)
    assert revolution_F(0.5) > revolution_F(0.9) > 0


def test_F_strictly_decreasing():
    vals = [revolution_F(a) for a in np.linspace(0.01, 1.0, 60)]
    assert np.all(np.diff(vals) < 0)


def test_F_blows_up_logarithmically():
    # F(a) ~ log(2/a) + const as a -> 0; the tenfold ratio is reached only for tiny a
    assert revolution_F(1e-5) > 10 * revolution_F(0.5)
    slope = (revolution_F(1e-4) - revolution_F(1e-3)) / math.log(10)
    assert slope == pytest.approx(1.0, abs=1e-2)


def test_arclength_defect():
    for a in (0.1, 0.5, 1.0):
        assert revolution_profile(a).arclength_defect() <= 1e-10


@pytest.mark.parametrize("a,K", [(0.5, 1.0), (0.3, 2.0)])
def test_revolution_support_values(a, K):
    prof = revolution_profile(a, K)
    assert prof.support_values(0.0, 0.0) == pytest.approx(-a / math.sqrt(K))
    F = revolution_F(a)
    for y in (0.0, 0.6):
        x = math.sqrt(1 - y * y)
        assert prof.support_values(x, y) == pytest.approx(F * x / math.sqrt(K), abs=1e-8)
        assert prof.support_values(-x, y) == pytest.approx(F * x / math.sqrt(K), abs=1e-8)
    assert math.isinf(prof.support_values(0.9, 0.9))


def test_revolution_support_symmetries():
    prof = revolution_profile(0.4)
    rng = np.random.default_rng(1)
    p = rng.uniform(-0.7, 0.7, size=(50, 2))
    v = prof.support_values(p[:, 0], p[:, 1])
    assert np.allclose(v, prof.support_values(-p[:, 0], p[:, 1]))
    assert np.allclose(v, prof.support_values(p[:, 0], -p[:, 1]))


def test_revolution_mesh_curvature():
    for K in (1.0, 2.5):
        _, mesh, field = revolution_surface(0.5, K, R=2.0, n_mesh=129, n_field=33)
        inner = mesh.curvature[4:-4, 4:-4]
        assert np.abs(inner / K - 1).max() < 0.02
        assert mesh.is_spacelike()
        assert np.isfinite(field.sample(0.0, 0.0))


def test_revolution_bad_parameter():
    with pytest.raises(ValueError):
        revolution_profile(0.0)
    with pytest.raises(ValueError):
        revolution_F(1.5)


# trough -----------------------------------------------------------------------------

def test_trough_support():
    assert trough_values(0.0, 0.0) == pytest.approx(-1.0)
    assert trough_values(0.0, 0.6) == pytest.approx(-0.8)
    assert math.isinf(trough_values(0.1, 0.0))
    assert math.isinf(trough_values(0.0, 1.2))


def test_trough_mesh_flat_direction():
    mesh = trough_mesh(R=2.0, n=33)
    assert np.allclose(np.diff(mesh.heights, axis=0), 0.0)
    assert np.abs(mesh.curvature).max() < 1e-8
    assert mesh.is_spacelike()
