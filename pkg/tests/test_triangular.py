import math

import numpy as np
import pytest

from cgcsurf.errors import BisectionExhausted, StepRejected
from cgcsurf.fields import grid_axis
from cgcsurf.triangular import (axis_properness_report, bochner_shoot, curve_speed_curvature, develop_ray,
                                develop_surface, divergence_integral, intrinsic_curvature,
                                normal_evolution_check, symmetry_check, triangle_phi, triangular_support)
from cgcsurf.triangular.develop import WChart, develop, w_of_z, z_of_w

VERTS = np.array([[math.cos(a), math.sin(a)] for a in np.radians([0.0, 120.0, 240.0])])
N = 65


@pytest.fixture(scope="module")
def zero_triangle():
    return triangular_support(1.0, VERTS, [0.0, 0.0, 0.0], n=N, levels=4)


# profile ----------------------------------------------------------------------------

def test_profile_regular_at_origin(profile):
    hz, dhz = profile.h_z(np.array([1e-4, 1e-3]))
    assert hz == pytest.approx([profile.h0, profile.h0], abs=1e-6)
    # h'(rho) ~ rho e^{2 h0} / 2 + ... is small and proportional to rho
    assert dhz[1] / dhz[0] == pytest.approx(10.0, rel=1e-3)


def test_profile_residual_and_decay(profile):
    r = np.array([0.3, 1.0, 5.0, 15.0])
    assert np.abs(profile.residual(r)).max() < 1e-6
    ht = profile.h(np.linspace(1.0, 25.0, 200))
    assert np.all(ht > 0) and np.all(np.diff(ht) < 0)


def test_embedding_data(profile):
    emb = profile.embedding_data(np.linspace(0.2, 10.0, 50))
    assert np.allclose(emb.det_B, 1.0, atol=1e-12)
    assert np.all(emb.G > emb.E)
    # E G = 4 sinh^2(2 ht)
    assert np.allclose(emb.EG, (2 * np.sinh(2 * profile.h(emb.r))) ** 2)


def test_intrinsic_curvature_is_minus_one(profile):
    u = np.array([0.5, 1.0, 2.0, 3.0])
    v = np.array([0.3, 0.1, 0.7, -0.4])
    assert intrinsic_curvature(profile, u, v) == pytest.approx(-1.0, abs=1e-6)


def test_profile_csv(profile, tmp_path):
    path = tmp_path / "profile.csv"
    profile.to_csv(path, count=50)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape == (50, 3)
    assert np.allclose(data[:, 1], profile.h(data[:, 0]))


def test_shoot_rejects_bad_input():
    with pytest.raises(ValueError):
        bochner_shoot(r_max=10.0)
    with pytest.raises(BisectionExhausted):
        bochner_shoot(bracket=(0.5, 2.0))


# development ------------------------------------------------------------------------

def test_chart_maps_inverse():
    for z in ([0.3, 0.4], [-0.5, 0.2], [1.2, -0.7]):
        w = w_of_z(z)
        lift = 1.5 * math.atan2(z[1], z[0])
        assert z_of_w(w, lift) == pytest.approx(z, abs=1e-12)


def test_gram_drift_along_rays(profile):
    for theta in (0.0, 0.7, math.pi):
        dev = develop_ray(profile, theta, [0.2, 1.0, 2.5])
        assert dev.drift.max() <= 1e-6


def test_small_rectangle_holonomy(profile):
    loop = np.array([[1.0, 0.2], [1.3, 0.2], [1.3, 0.5], [1.0, 0.5], [1.0, 0.2]])
    dev = develop_surface(profile, loop, anchor="start", step=0.002)
    start = np.concatenate([np.zeros(3), np.eye(3).ravel()])
    assert np.abs(dev.end_state - start).max() <= 1e-5


def test_axis_speed_and_curvature(profile):
    s = np.linspace(0.5, 2.0, 151)
    dev = develop_surface(profile, np.column_stack([s, np.zeros_like(s)]), anchor="start", step=0.005)
    t, speed, curv = curve_speed_curvature(dev, s)
    ht = profile.h(t)
    assert speed / (2 * np.sinh(ht)) == pytest.approx(np.ones_like(t), rel=1e-3)
    assert curv * np.tanh(ht) == pytest.approx(np.ones_like(t), rel=1e-3)


def test_developed_normals_future_timelike(profile):
    dev = develop_ray(profile, 0.4, [0.1, 0.5, 1.5, 2.5])
    n = dev.normals
    assert np.all(n[:, 2] > 0)
    assert np.allclose(n[:, 0] ** 2 + n[:, 1] ** 2 - n[:, 2] ** 2, -1.0, atol=1e-6)
    assert np.all(np.hypot(*dev.gauss_points().T) < 1)


def test_step_rejected(profile):
    wc = WChart(profile)
    start = np.array([0, 0, 0, 1.0, 0, 0, 0, 1.0, 0, 0, 0, 1.0])
    with pytest.raises(StepRejected):
        develop(wc, np.array([[1.0, 0.0], [2.0, 0.0]]), start, step=0.5, gram_tol=1e-15, max_halvings=0)


def test_normal_evolution_metric(profile):
    path = np.array([[0.3, 0.1], [0.8, 0.4], [1.2, -0.2]])
    rep = normal_evolution_check(profile, path)
    assert rep["passed"], rep


def test_symmetry(profile):
    rep = symmetry_check(profile)
    assert rep["max_point_diff"] < 1e-8
    assert rep["max_value_diff"] < 1e-8


# properness -------------------------------------------------------------------------

def test_divergence_integral_monotone(profile):
    u, I, inner = divergence_integral(profile, 10.0, count=4000)
    assert np.all(np.diff(I) > 0) and np.all(np.diff(inner) > 0)


def test_properness_report(profile):
    rep = axis_properness_report(profile, r_max=10.0)
    assert rep["increasing"]
    assert rep["bound_holds"]
    assert rep["lightlike_increasing"]
    assert rep["lightlike_vs_integral"] < 1e-4
    assert rep["negative_axis_complete"]


# Monge-Ampere over the triangle -----------------------------------------------------

def test_triangle_phi_validation():
    with pytest.raises(ValueError):
        triangle_phi([[0.5, 0.0], [0.0, 1.0], [-1.0, 0.0]], [0, 0, 0])
    with pytest.raises(ValueError):
        triangle_phi([[1.0, 0.0], [1.0, 0.0], [-1.0, 0.0]], [0, 0, 0])
    with pytest.raises(ValueError):
        triangular_support(0.0, VERTS, [0, 0, 0], n=N)


def test_triangle_edges_carry_data(zero_triangle):
    assert zero_triangle.diagnostics["edge_trace"]["max_abs"] < 1e-9
    assert zero_triangle.diagnostics["vertex_values"] == [0.0, 0.0, 0.0]
    assert zero_triangle.u.sample(0.0, 0.0) < 0


def test_triangle_affine_equivariance(zero_triangle):
    c, d = np.array([0.25, -0.1]), 0.05
    vals = VERTS @ c + d
    sol = triangular_support(1.0, VERTS, vals, n=N, levels=4)
    ax = grid_axis(N)
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    m = np.isfinite(zero_triangle.u.values) & (X * X + Y * Y <= 0.25)
    shifted = zero_triangle.u.values + c[0] * X + c[1] * Y + d
    assert np.abs(sol.u.values[m] - shifted[m]).max() < 2e-3


def test_triangle_curvature_scaling(zero_triangle):
    sol = triangular_support(4.0, VERTS, [0.0, 0.0, 0.0], n=N, levels=4)
    ax = grid_axis(N)
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    m = np.isfinite(zero_triangle.u.values) & (X * X + Y * Y <= 0.25)
    assert np.abs(sol.u.values[m] - zero_triangle.u.values[m] / 2).max() < 2e-3


def test_triangle_rotational_symmetry(zero_triangle):
    pts = np.array([[0.2, 0.1], [-0.1, 0.25], [0.05, -0.3]])
    c, s = math.cos(2 * math.pi / 3), math.sin(2 * math.pi / 3)
    rot = pts @ np.array([[c, -s], [s, c]]).T
    a = np.array([zero_triangle.u.sample(*p) for p in pts])
    b = np.array([zero_triangle.u.sample(*p) for p in rot])
    assert np.abs(a - b).max() < 5e-3
