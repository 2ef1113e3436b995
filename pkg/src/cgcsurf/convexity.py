"""Support functions, Legendre duality, convex envelopes and Monge-Ampere measures."""

from __future__ import annotations

import enum
import math

import numpy as np
import shapely
from scipy.spatial import ConvexHull, QhullError

from .errors import AllInfinite, EmptyMesh, InfiniteCell, NotGradientSurjective, NotRegular
from .fields import DiskField, GridField, SurfaceMesh, disk_mask, grid_axis
from .regions import BoundaryFunction, PlanarConvexRegion, finiteness_hull

__all__ = [
    "BoundaryFunction", "DiskField", "GridField", "PlanarConvexRegion", "SurfaceMesh",
    "DomainClass", "legendre_transform", "support_of_mesh", "mesh_from_support",
    "convex_envelope", "envelope_function", "finiteness_hull", "ma_measure",
    "subgradient_polygon", "domain_membership", "classify_domain",
    "gradient_coverage_radius", "interior_gradients",
]

_CHUNK = 2 ** 24


def _partial_conjugate(xs, F, qs):
    """g[i, k] = max_j (qs[k] * xs[j] - F[i, j]) and the maximising j.

    F is (m, n) with +inf marking missing samples.
    """
    m = F.shape[0]
    fin = np.isfinite(F)
    Fm = np.where(fin, F, 0.0)
    g = np.full((m, qs.size), -np.inf)
    arg = np.zeros((m, qs.size), dtype=int)
    step = max(1, _CHUNK // max(1, m * xs.size))
    for k0 in range(0, qs.size, step):
        q = qs[k0:k0 + step]
        val = q[None, None, :] * xs[None, :, None] - Fm[:, :, None]
        val = np.where(fin[:, :, None], val, -np.inf)
        a = val.argmax(axis=1)
        arg[:, k0:k0 + step] = a
        g[:, k0:k0 + step] = np.take_along_axis(val, a[:, None, :], axis=1)[:, 0, :]
    return g, arg


def _conjugate(xs, ys, F, ps, qs):
    """Separable brute-force max over all finite samples; returns values and argmax."""
    g, argj = _partial_conjugate(ys, F, qs)          # (nx, nq)
    G, argi = _partial_conjugate(xs, (-g).T, ps)     # (nq, np): max_i p x_i + g[i, q]
    vals = G.T                                       # (np, nq)
    ii = argi.T
    jj = argj[ii, np.arange(qs.size)[None, :]]
    return vals, ii, jj


def legendre_transform(f: GridField, n: int | None = None, half_width: float | None = None,
                       disk: bool | None = None) -> GridField:
    """f*(y) = sup_x (x.y - f(x)) over the finite samples of f, on a target grid.

    With ``disk=True`` (default when the target half-width is 1) the result is a
    DiskField, +inf outside the closed disk.
    """
    if not f.finite.any():
        raise AllInfinite("legendre_transform of an identically infinite field")
    n = n or f.n
    half_width = float(half_width if half_width is not None else f.half_width)
    xs = f.axis
    tgt = grid_axis(n, half_width)
    vals, _, _ = _conjugate(xs, xs, f.values, tgt, tgt)
    meta = dict(f.meta, legendre=True)
    if disk is None:
        disk = half_width == 1.0
    if disk:
        return DiskField(vals, closed_convex=True, meta=meta)
    return GridField(vals, half_width, closed_convex=True, meta=meta)


def _slope_bound(f: GridField) -> float:
    """Largest difference quotient between neighbouring finite samples, times sqrt 2."""
    V, fin = f.values, f.finite
    best = 0.0
    for axis in (0, 1):
        a, b = np.swapaxes(V, 0, axis), np.swapaxes(fin, 0, axis)
        ok = b[1:] & b[:-1]
        if ok.any():
            best = max(best, float(np.abs(a[1:][ok] - a[:-1][ok]).max()))
    return math.sqrt(2.0) * best / f.h


def biconjugate(f: GridField, dual_half_width: float | None = None, dual_n: int | None = None,
                max_dual_n: int = 1025) -> GridField:
    """f** through an intermediate dual grid.

    By default the dual window is the discrete slope bound of f, capped at
    1/(4h): the cap balances truncation near the rim of the disk, about 1/(2R),
    against the dual spacing. The dual grid is refined toward spacing h (at most
    ``max_dual_n`` nodes) since crease slopes fall between dual nodes.
    """
    if dual_half_width is not None:
        R = float(dual_half_width)
    else:
        R = min(0.25 / f.h, 1.01 * _slope_bound(f) + f.h)
    if dual_n is None:
        dual_n = int(min(max_dual_n, max(f.n, math.ceil(2 * R / f.h) + 1)))
        dual_n += 1 - dual_n % 2
    star = legendre_transform(f, n=dual_n, half_width=R, disk=False)
    return legendre_transform(star, n=f.n, half_width=f.half_width)


def support_of_mesh(S: SurfaceMesh, n: int = 129) -> DiskField:
    """u(y) = max over vertices of <x, (y, 1)>: a lower bound of the true support function."""
    if S.heights.size == 0:
        raise EmptyMesh("mesh has no vertex")
    a = S.axis
    vals, _, _ = _conjugate(a, a, S.heights, grid_axis(n), grid_axis(n))
    return DiskField(vals, closed_convex=True, meta=dict(S.meta, support_of_mesh=True))


# gradients -----------------------------------------------------------------

def _interior_nodes(u: GridField):
    fin = u.finite
    inner = np.zeros_like(fin)
    inner[1:-1, 1:-1] = (fin[1:-1, 1:-1] & fin[2:, 1:-1] & fin[:-2, 1:-1]
                         & fin[1:-1, 2:] & fin[1:-1, :-2])
    if u.region is not None and u.region.flag == "full":
        X, Y = u.mesh()
        inner &= u.region.contains(X, Y)
    return inner


def interior_gradients(u: GridField):
    """Central-difference gradients at nodes whose 4 neighbours are finite."""
    inner = _interior_nodes(u)
    V = np.where(u.finite, u.values, 0.0)
    gx = np.zeros_like(V)
    gy = np.zeros_like(V)
    gx[1:-1, :] = (V[2:, :] - V[:-2, :]) / (2 * u.h)
    gy[:, 1:-1] = (V[:, 2:] - V[:, :-2]) / (2 * u.h)
    return inner, gx, gy


def _hull_radius(points):
    if len(points) < 3:
        return 0.0, None
    try:
        hull = ConvexHull(points)
    except QhullError:
        return 0.0, None
    d = -hull.equations[:, 2]
    return (float(d.min()) if (d > 0).all() else 0.0), hull


def gradient_coverage_radius(u: GridField) -> float:
    """Radius of the largest origin-centred disk inside the hull of the gradients."""
    inner, gx, gy = interior_gradients(u)
    return _hull_radius(np.column_stack([gx[inner], gy[inner]]))[0]


def mesh_from_support(u: GridField, R: float, n: int = 65) -> SurfaceMesh:
    """Dual graph f = u* over [-R, R]^2 with normals, Gauss samples and curvature."""
    inner, gx, gy = interior_gradients(u)
    pts = np.column_stack([gx[inner], gy[inner]])
    radius, hull = _hull_radius(pts)
    corners = np.array([[R, R], [R, -R], [-R, R], [-R, -R]])
    if hull is None or (corners @ hull.equations[:, :2].T + hull.equations[:, 2] > 0).any():
        raise NotGradientSurjective(radius, R)

    xs = u.axis
    tgt = grid_axis(n, R)
    vals, ii, jj = _conjugate(xs, xs, u.values, tgt, tgt)
    P, Q = np.meshgrid(tgt, tgt, indexing="ij")

    # local quadratic refinement of the discrete maximiser
    V = np.where(u.finite, u.values, 0.0)
    h = u.h
    ok = inner[ii, jj]
    ok &= (ii > 0) & (ii < u.n - 1) & (jj > 0) & (jj < u.n - 1)
    ic, jc = np.clip(ii, 1, u.n - 2), np.clip(jj, 1, u.n - 2)
    fin = u.finite
    ok &= fin[ic + 1, jc + 1] & fin[ic - 1, jc - 1] & fin[ic + 1, jc - 1] & fin[ic - 1, jc + 1]
    c = V[ic, jc]
    uxx = (V[ic + 1, jc] - 2 * c + V[ic - 1, jc]) / h ** 2
    uyy = (V[ic, jc + 1] - 2 * c + V[ic, jc - 1]) / h ** 2
    uxy = (V[ic + 1, jc + 1] - V[ic + 1, jc - 1] - V[ic - 1, jc + 1] + V[ic - 1, jc - 1]) / (4 * h ** 2)
    det = uxx * uyy - uxy ** 2
    ok &= (uxx > 0) & (det > 0)
    rx, ry = P - gx[ic, jc], Q - gy[ic, jc]
    sdet = np.where(ok, det, 1.0)
    dx = (uyy * rx - uxy * ry) / sdet
    dy = (-uxy * rx + uxx * ry) / sdet
    ok &= (np.abs(dx) <= 1.5 * h) & (np.abs(dy) <= 1.5 * h)
    dx, dy = np.where(ok, dx, 0.0), np.where(ok, dy, 0.0)
    f = vals + np.where(ok, 0.5 * (rx * dx + ry * dy), 0.0)
    gauss = np.stack([xs[ii] + dx, xs[jj] + dy], axis=-1)

    g2 = np.minimum((gauss ** 2).sum(axis=-1), 1 - 1e-300)
    normals = np.concatenate([gauss, np.ones(g2.shape)[..., None]], axis=-1) / np.sqrt(1 - g2)[..., None]
    hm = tgt[1] - tgt[0]
    d1 = np.gradient(gauss[..., 0], hm, axis=0)
    d2 = np.gradient(gauss[..., 1], hm, axis=1)
    d12 = np.gradient(gauss[..., 0], hm, axis=1)
    d21 = np.gradient(gauss[..., 1], hm, axis=0)
    curvature = (d1 * d2 - (0.5 * (d12 + d21)) ** 2) / (1 - g2) ** 2
    meta = dict(u.meta, covered_radius=radius, R=float(R))
    mesh = SurfaceMesh(f, R, normals=normals, curvature=curvature, meta=meta)
    mesh.gauss = gauss
    return mesh


# convex envelope -------------------------------------------------------------

def envelope_function(phi: BoundaryFunction):
    """Callable (x, y) -> conv(phi)(x, y), +inf off the hull of the finite nodes."""
    P = phi.finite_points()
    z = phi.finite_values()
    k = len(P)

    if k == 0:
        return lambda x, y: np.full(np.broadcast(np.asarray(x), np.asarray(y)).shape, np.inf)
    if k == 1:
        def point(x, y):
            x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
            at = np.hypot(x - P[0, 0], y - P[0, 1]) <= 1e-12
            return np.where(at, z[0], np.inf)
        return point
    if k == 2:
        d = P[1] - P[0]
        L2 = float(d @ d)

        def segment(x, y):
            x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
            t = ((x - P[0, 0]) * d[0] + (y - P[0, 1]) * d[1]) / L2
            off = np.abs((x - P[0, 0]) * d[1] - (y - P[0, 1]) * d[0]) / np.sqrt(L2)
            on = (off <= 1e-12) & (t >= -1e-12) & (t <= 1 + 1e-12)
            return np.where(on, z[0] + np.clip(t, 0, 1) * (z[1] - z[0]), np.inf)
        return segment

    region = finiteness_hull(phi)
    planes = _lower_planes(P, z)

    def envelope(x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        val = np.full(x.shape, -np.inf)
        for a, b, c in planes:
            val = np.maximum(val, a * x + b * y + c)
        return np.where(region.contains(x, y, closed=True, tol=1e-12), val, np.inf)

    envelope.planes = planes
    envelope.region = region
    return envelope


def _lower_planes(P, z):
    """Affine pieces (a, b, c) of the lower convex hull of {(P_i, z_i)}."""
    pts = np.column_stack([P, z])
    centred = pts - pts.mean(axis=0)
    sv = np.linalg.svd(centred, compute_uv=False)
    if sv[-1] <= 1e-12 * max(sv[0], 1.0):
        coef, *_ = np.linalg.lstsq(np.column_stack([P, np.ones(len(P))]), z, rcond=None)
        return [tuple(coef)]
    hull = ConvexHull(pts)
    eq = hull.equations
    lower = eq[:, 2] < -1e-12
    out = []
    for nx, ny, nz, off in eq[lower]:
        out.append((-nx / nz, -ny / nz, -off / nz))
    return sorted(set(out))


def convex_envelope(phi: BoundaryFunction, n: int = 129) -> DiskField:
    """conv(phi) sampled on the n x n disk grid, with Omega_phi stored as region."""
    f = envelope_function(phi)
    a = grid_axis(n)
    X, Y = np.meshgrid(a, a, indexing="ij")
    vals = np.asarray(f(X, Y), dtype=float)
    return DiskField(vals, region=finiteness_hull(phi), closed_convex=True,
                     meta={"phi": phi.pairs_degrees(), "envelope": True})


# domains ---------------------------------------------------------------------

class DomainClass(enum.Enum):
    NOT_REGULAR = "NotRegular"
    WEDGE = "Wedge"
    REGULAR = "Regular"


def classify_domain(phi: BoundaryFunction) -> DomainClass:
    k = int(phi.finite.sum())
    if k < 2:
        return DomainClass.NOT_REGULAR
    if k == 2:
        return DomainClass.WEDGE
    return DomainClass.REGULAR


def domain_membership(phi: BoundaryFunction, p) -> bool:
    """True iff p lies in the open future of every defining null plane."""
    if phi.finite.sum() < 2:
        raise NotRegular("membership needs at least two finite nodes")
    from .lorentz import _arr

    q = _arr(p)
    xi = phi.finite_points()
    return bool((q[0] * xi[:, 0] + q[1] * xi[:, 1] - q[2] < phi.finite_values()).all())


# Monge-Ampere measure ----------------------------------------------------------

_BIG = 1e8


def _clip(poly, a, b):
    """Clip a convex polygon (m, 2) by {p : a.p <= b}."""
    s = poly @ a - b
    inside = s <= 0
    if inside.all():
        return poly
    if not inside.any():
        return poly[:0]
    out = []
    m = len(poly)
    for k in range(m):
        p, q = poly[k], poly[(k + 1) % m]
        sp, sq = s[k], s[(k + 1) % m]
        if sp <= 0:
            out.append(p)
        if (sp <= 0) != (sq <= 0):
            t = sp / (sp - sq)
            out.append(p + t * (q - p))
    return np.array(out)


def subgradient_polygon(X, U, k):
    """Subgradient set of the grid function at node k against all nodes.

    X is (m, 2) node positions, U the (m,) finite values. Returns the polygon
    vertices, or None if the set is unbounded.
    """
    A = X - X[k]
    b = U - U[k]
    mask = np.ones(len(X), bool)
    mask[k] = False
    A, b = A[mask], b[mask]
    poly = np.array([[-_BIG, -_BIG], [_BIG, -_BIG], [_BIG, _BIG], [-_BIG, _BIG]])
    tol = 1e-13
    while len(poly):
        viol = A @ poly.T - b[:, None]
        worst = viol.max(axis=1)
        j = int(worst.argmax())
        if worst[j] <= tol * (1 + np.abs(b[j])):
            break
        poly = _clip(poly, A[j], b[j])
    if len(poly) and np.abs(poly).max() >= _BIG * (1 - 1e-9):
        return None
    return poly


def ma_measure(u: GridField, cells) -> list:
    """Aleksandrov measure of each cell (a list of (i, j) node index pairs)."""
    fin = u.finite
    Xg, Yg = u.mesh()
    idx = -np.ones(fin.shape, int)
    idx[fin] = np.arange(fin.sum())
    X = np.column_stack([Xg[fin], Yg[fin]])
    U = u.values[fin]
    cache = {}
    out = []
    for cell in cells:
        polys = []
        for i, j in np.asarray(cell, dtype=int).reshape(-1, 2):
            k = idx[i, j]
            if k < 0:
                raise InfiniteCell(f"node ({i}, {j}) has value +inf")
            if k not in cache:
                cache[k] = subgradient_polygon(X, U, k)
            poly = cache[k]
            if poly is None:
                raise InfiniteCell(f"node ({i}, {j}) has an unbounded subgradient")
            if len(poly) >= 3:
                g = shapely.Polygon(poly)
                if g.area > 0:
                    polys.append(g)
        out.append(float(shapely.union_all(polys).area) if polys else 0.0)
    return out
