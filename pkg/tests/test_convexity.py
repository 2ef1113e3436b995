import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cgcsurf.barriers import hyperboloid_mesh, hyperboloid_support, trough_mesh
from cgcsurf.convexity import (DomainClass, biconjugate, classify_domain, convex_envelope, domain_membership,
                               envelope_function, legendre_transform, ma_measure, mesh_from_support,
                               support_of_mesh)
from cgcsurf.errors import AllInfinite, InfiniteCell, NotGradientSurjective, NotRegular
from cgcsurf.fields import DiskField, GridField, SurfaceMesh
from cgcsurf.regions import BoundaryFunction, finiteness_hull

TRI = BoundaryFunction.from_pairs([(0, 0.0), (120, 0.0), (240, 0.0)])


def test_legendre_of_norm_is_disk_indicator():
    ax = np.linspace(-3, 3, 121)
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    f = GridField(np.hypot(X, Y), half_width=3.0)
    g = legendre_transform(f, n=65, half_width=1.0)
    Xd, Yd = g.mesh()
    inside = Xd * Xd + Yd * Yd <= 1
    assert np.abs(g.values[inside]).max() < 1e-12
    assert g.closed_convex


def test_legendre_hyperboloid_oracle():
    u = hyperboloid_support(1.0, 257)
    f = legendre_transform(u, n=41, half_width=2.0, disk=False)
    P, Q = f.mesh()
    exact = np.sqrt(1 + P * P + Q * Q)
    assert np.abs(f.values - exact).max() < 5e-3
    # graph points (p, f(p)) lie on <x, x> = -1
    assert np.abs(P * P + Q * Q - f.values ** 2 + 1).max() < 2e-2


def test_legendre_affine_single_point():
    ax = np.linspace(-2, 2, 81)
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    f = GridField(0.5 * X - 0.25 * Y + 0.3, half_width=2.0)
    g = legendre_transform(f, n=81, half_width=2.0)
    i, j = np.unravel_index(np.argmin(g.values), g.values.shape)
    assert g.axis[i] == pytest.approx(0.5) and g.axis[j] == pytest.approx(-0.25)
    assert g.values[i, j] == pytest.approx(-0.3)
    # on a box of half-width W the dual is -d + W |y - c|_1, which tends to +inf off c as W grows
    P, Q = g.mesh()
    assert np.allclose(g.values, -0.3 + 2.0 * (np.abs(P - 0.5) + np.abs(Q + 0.25)), atol=1e-12)


def test_legendre_all_infinite():
    with pytest.raises(AllInfinite):
        legendre_transform(DiskField(np.full((9, 9), np.inf)))


def test_support_of_hyperboloid_mesh():
    R = 20.0
    u = support_of_mesh(hyperboloid_mesh(1.0, R, 201), 65)
    assert abs(u.sample(0.0, 0.0) + 1) <= 1 / (2 * R)


def test_support_of_translated_mesh():
    m = hyperboloid_mesh(1.0, 3.0, 65)
    shifted = SurfaceMesh(m.heights + 0.7, m.half_width)
    a, b = support_of_mesh(m, 33), support_of_mesh(shifted, 33)
    f = a.finite
    assert np.allclose(b.values[f], a.values[f] - 0.7)


def test_support_of_trough_mesh():
    small, big = support_of_mesh(trough_mesh(2.0, 65), 33), support_of_mesh(trough_mesh(8.0, 65), 33)
    assert abs(big.sample(0.0, 0.5) + math.sqrt(0.75)) < 0.02
    assert big.sample(0.5, 0.0) > small.sample(0.5, 0.0) + 1.0


def test_mesh_from_support_hyperboloid():
    for K in (1.0, 4.0):
        u = hyperboloid_support(K, 257)
        mesh = mesh_from_support(u, 2.0, n=33)
        X, Y = mesh.mesh()
        exact = np.sqrt(1 / K + X * X + Y * Y)
        assert np.abs(mesh.heights - exact).max() < 5e-3
        assert mesh.is_spacelike()


def test_mesh_from_affine_support_rejected():
    u = DiskField.from_function(lambda x, y: 0.2 * x + 0.1 * y, 33)
    with pytest.raises(NotGradientSurjective):
        mesh_from_support(u, 1.0)


def test_support_mesh_round_trip_lower_bound():
    u = hyperboloid_support(1.0, 129)
    prev = None
    for R in (1, 2, 4):
        # nested planar grids (spacing 1/16), so larger R only adds vertices
        back = support_of_mesh(mesh_from_support(u, float(R), n=32 * R + 1), 65)
        f = back.finite
        assert (back.values[f] <= u.sample(*[a[f] for a in back.mesh()]) + 1e-3).all()
        if prev is not None:
            assert (back.values[f] >= prev[f] - 1e-12).all()
        prev = back.values


def test_envelope_examples():
    env = convex_envelope(TRI, 65)
    X, Y = env.mesh()
    inside = env.region.contains(X, Y, closed=True)
    assert np.all(env.values[inside] == 0)
    assert np.all(np.isinf(env.values[~inside]))
    wedge = envelope_function(BoundaryFunction.from_pairs([(0, 0.0), (180, 0.0)]))
    assert wedge(0.3, 0.0) == 0 and np.isinf(wedge(0.3, 0.1))


def test_envelope_square_brute_force():
    phi = BoundaryFunction.from_pairs([(45, 0.0), (135, 0.0), (225, 0.0), (315, 1.0)])
    env = envelope_function(phi)
    P, z = phi.finite_points(), phi.finite_values()
    rng = np.random.default_rng(3)
    pts = rng.uniform(-0.7, 0.7, size=(200, 2))
    for x, y in pts:
        best = np.inf
        for i, j, k in itertools.combinations(range(4), 3):
            T = np.array([P[i], P[j], P[k]])
            M = np.vstack([T.T, np.ones(3)])
            lam = np.linalg.solve(M, [x, y, 1.0])
            if (lam >= -1e-12).all():
                best = min(best, float(lam @ z[[i, j, k]]))
        assert env(x, y) == pytest.approx(best, abs=1e-12)


@given(st.lists(st.tuples(st.integers(0, 359), st.floats(-2, 2)), min_size=3, max_size=12,
                unique_by=lambda t: t[0]))
@settings(max_examples=40, deadline=None)
def test_envelope_matches_phi_and_is_affine_on_chords(pairs):
    phi = BoundaryFunction.from_pairs(pairs)
    env = envelope_function(phi)
    P, z = phi.finite_points(), phi.finite_values()
    assert np.all(env(P[:, 0], P[:, 1]) <= z + 1e-12)
    hull = finiteness_hull(phi)
    if hull.flag != "full":
        return
    # at hull vertices, conv(phi) equals phi; along each hull edge it is affine
    for a, b in zip(hull.vertices, np.roll(hull.vertices, -1, axis=0)):
        t = np.linspace(0, 1, 7)
        x, y = a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])
        v = env(x, y)
        assert np.abs(np.diff(v, 2)).max() <= 1e-10
    hv = hull.vertices
    assert np.allclose(env(hv[:, 0], hv[:, 1]), [z[np.argmin(np.hypot(*(P - p).T))] for p in hv], atol=1e-12)


def test_finiteness_hull_flags():
    assert finiteness_hull(TRI).flag == "full"
    assert finiteness_hull(BoundaryFunction.from_pairs([(0, 0.0), (90, 1.0)])).flag == "segment"
    assert finiteness_hull(BoundaryFunction.from_pairs([(0, 0.0)])).flag in ("point", "empty")
    dense = finiteness_hull(BoundaryFunction.dense(0.0))
    assert dense.inradius > 0.99


def test_classify_examples():
    assert classify_domain(BoundaryFunction.from_pairs([(0, 0.0)])) is DomainClass.NOT_REGULAR
    assert classify_domain(BoundaryFunction.from_pairs([(0, 0.0), (90, 0.0)])) is DomainClass.WEDGE
    assert classify_domain(TRI) is DomainClass.REGULAR


def test_membership_examples():
    cone = BoundaryFunction.dense(0.0)
    assert domain_membership(cone, (0, 0, 1)) and not domain_membership(cone, (0, 0, -1))
    wedge = BoundaryFunction.from_pairs([(0, 0.0), (180, 0.0)])
    assert all(domain_membership(wedge, (0, 0, t)) for t in (0.01, 1.0, 100.0))
    # the three vertex planes meet at the origin for zero data
    assert not domain_membership(TRI, (0, 0, 0))
    with pytest.raises(NotRegular):
        domain_membership(BoundaryFunction.from_pairs([(0, 0.0)]), (0, 0, 1))


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 3), st.floats(0, 2), st.floats(-1, 1), st.floats(-1, 1))
def test_membership_future_monotone(x, y, z, t, a, b):
    s = math.hypot(a, b)
    w = (a, b, s + t + 1e-3)  # future timelike
    p = (x, y, z)
    if domain_membership(TRI, p):
        assert domain_membership(TRI, (x + w[0], y + w[1], z + w[2]))


def test_ma_measure_examples():
    n = 17
    ax = np.linspace(-1, 1, n)
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    q = GridField(0.5 * (X * X + Y * Y))
    h = q.h
    cells = [[(8, 8)], [(5, 6), (5, 7), (6, 6), (6, 7)]]
    m = ma_measure(q, cells)
    assert m[0] == pytest.approx(h * h, rel=1e-9)
    assert m[1] == pytest.approx(4 * h * h, rel=1e-9)
    cone = GridField(np.hypot(X, Y))
    apex, away = ma_measure(cone, [[(8, 8)], [(3, 4)]])
    # against finitely many nodes the apex subgradient is a polygon circumscribing the unit disk
    assert math.pi <= apex <= 1.05 * math.pi
    # a sliver from the discrete hull, far below one cell area
    assert 0 <= away <= 1e-2 * h * h
    crease = GridField(np.maximum(0.3 * X, -0.2 * X + 0.1 * Y))
    assert ma_measure(crease, [[(8, 8), (8, 9)]])[0] == pytest.approx(0.0, abs=1e-12)


def test_ma_measure_boundary_cell_infinite():
    ax = np.linspace(-1, 1, 9)
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    with pytest.raises(InfiniteCell):
        ma_measure(GridField(X * X + Y * Y), [[(0, 4)]])


@given(st.integers(0, 10_000))
@settings(max_examples=10, deadline=None)
def test_ma_measure_additive(seed):
    rng = np.random.default_rng(seed)
    ax = np.linspace(-1, 1, 11)
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    A = rng.normal(size=(3, 2))
    u = GridField(0.5 * (X * X + 2 * Y * Y) + np.max(A[:, 0, None, None] * X + A[:, 1, None, None] * Y, axis=0))
    nodes = [(i, j) for i in range(2, 9) for j in range(2, 9)]
    rng.shuffle(nodes)
    k = int(rng.integers(1, len(nodes) - 1))
    whole = ma_measure(u, [nodes])[0]
    parts = sum(ma_measure(u, [nodes[:k], nodes[k:]]))
    assert parts == pytest.approx(whole, rel=1e-8)


def test_biconjugate_fields():
    u = hyperboloid_support(1.0, 129)
    back = biconjugate(u)
    assert np.abs(back.values[u.finite] - u.values[u.finite]).max() <= 3 * u.h
