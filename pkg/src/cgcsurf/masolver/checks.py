"""Comparison-principle and entireness diagnostics."""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize_scalar

from ..convexity import gradient_coverage_radius, ma_measure
from ..errors import CGCError
from ..fields import GridField, grid_axis
from ..regions import PlanarConvexRegion


def _as_values(u, X, Y):
    if isinstance(u, GridField):
        if u.values.shape != X.shape:
            return np.asarray(u.sample(X, Y), float)
        return u.values
    return np.asarray(u(X, Y), float) * np.ones_like(X)


def _boundary_min(fp, fm, region: PlanarConvexRegion, samples=400, refine=8):
    """Minimum of fp - fm over the region boundary.

    Every boundary segment is sampled densely; the ``refine`` segments with the
    lowest sampled minima get a bounded scalar refinement.
    """
    pts = region.boundary_points()
    A, B = pts, np.roll(pts, -1, axis=0)
    ts = np.linspace(0.0, 1.0, samples)
    P = A[:, None, :] + ts[None, :, None] * (B - A)[:, None, :]
    vals = np.asarray(fp(P[..., 0], P[..., 1]) - fm(P[..., 0], P[..., 1]), float).reshape(len(A), samples)
    seg_min = vals.min(axis=1)
    best = float(seg_min.min())
    for s in np.argsort(seg_min)[:refine]:
        a, b = A[s], B[s]

        def g(t, a=a, b=b):
            p = a + t * (b - a)
            return float(fp(p[0], p[1]) - fm(p[0], p[1]))
        k = int(np.argmin(vals[s]))
        lo, hi = ts[max(k - 1, 0)], ts[min(k + 1, samples - 1)]
        r = minimize_scalar(g, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        if np.isfinite(r.fun):
            best = min(best, float(r.fun))
    return best


def comparison_check(u_plus, u_minus, region: PlanarConvexRegion, n: int = 129,
                     coarse: int = 17, verify_ma: bool = True, ma_slack: float = 1e-9) -> dict:
    """Interior minimum of u_plus - u_minus against its boundary minimum.

    Arguments are DiskFields or vectorised callables. With callables the
    boundary minimum is taken along the true boundary of ``region``; with
    grids, over the grid nodes of the closed region that have a neighbour
    outside it. When ``verify_ma`` is set, MA(u_plus) <= MA(u_minus) is tested
    cell by cell with the Aleksandrov measure on a coarse grid restricted to
    the region.
    """
    ax = grid_axis(n)
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    P, M = _as_values(u_plus, X, Y), _as_values(u_minus, X, Y)
    closed = region.contains(X, Y, closed=True)
    inner = region.contains(X, Y)
    with np.errstate(invalid="ignore"):
        D = P - M
    fin = np.isfinite(P) & np.isfinite(M)
    if not (fin & inner).any():
        raise CGCError("no finite interior nodes for the comparison")
    edge = closed & ~inner
    nb = np.zeros_like(closed)
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        nb |= ~np.roll(np.roll(closed, di, 0), dj, 1)
    edge |= closed & nb
    interior = inner & ~edge & fin
    if callable(u_plus) and callable(u_minus) and not isinstance(u_plus, GridField) \
            and not isinstance(u_minus, GridField):
        bmin = _boundary_min(u_plus, u_minus, region)
    else:
        bmin = float(D[edge & fin].min())
    imin = float(D[interior].min())
    report = {
        "min_closure": min(imin, bmin),
        "min_boundary": bmin,
        "min_interior": imin,
        "margin": imin - bmin,
        "interior_nodes": int(interior.sum()),
    }
    if verify_ma:
        report.update(ma_ordering(u_plus, u_minus, region, coarse, ma_slack))
    return report


def ma_ordering(u_plus, u_minus, region, coarse=17, slack=1e-9) -> dict:
    """Cellwise MA(u_plus) <= MA(u_minus) on a coarse grid of nodes inside ``region``."""
    ax = grid_axis(coarse)
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    inside = region.contains(X, Y)
    P, M = _as_values(u_plus, X, Y), _as_values(u_minus, X, Y)
    use = inside & np.isfinite(P) & np.isfinite(M)
    fp = GridField(np.where(use, P, np.inf))
    fm = GridField(np.where(use, M, np.inf))
    cells = []
    for i in range(1, coarse - 1):
        for j in range(1, coarse - 1):
            block = use[i - 1:i + 2, j - 1:j + 2]
            if block.all():
                cells.append([(i, j)])
    if not cells:
        return {"ma_cells": 0, "ma_ordered": False, "ma_worst": float("nan")}
    try:
        mp = np.array(ma_measure(fp, cells))
        mm = np.array(ma_measure(fm, cells))
    except CGCError:
        return {"ma_cells": len(cells), "ma_ordered": False, "ma_worst": float("nan")}
    worst = float(np.max(mp - mm))
    return {"ma_cells": len(cells), "ma_ordered": bool(worst <= slack), "ma_worst": worst}


def entireness_check(sol, K_or_b: float, triangles=None, n: int = 65, tol: float = 2e-2) -> dict:
    """Gradient coverage plus the triangular-barrier separation test.

    ``triangles`` lists index triples into the finite nodes of sol.phi; by
    default the first, middle and last finite nodes are used. For each, the
    triangular support u0 with curvature K_or_b through those three values is
    solved on an n-grid and max(u - u0) over the triangle is reported.
    """
    from ..triangular import triangular_support

    report = {"coverage_radius": gradient_coverage_radius(sol.u)}
    pts = sol.phi.finite_points()
    vals = sol.phi.finite_values()
    m = len(vals)
    if triangles is None:
        triangles = [(0, m // 3, (2 * m) // 3)] if m >= 3 else []
    out = []
    for tri in triangles:
        V = pts[list(tri)]
        z = np.asarray(vals, float)[list(tri)]
        t0 = triangular_support(K_or_b, V, z, n=n)
        ax = grid_axis(n)
        X, Y = np.meshgrid(ax, ax, indexing="ij")
        U0 = t0.u.values
        U = sol.u.values if sol.u.n == n else sol.u.sample(X, Y)
        ok = np.isfinite(U0) & np.isfinite(U) & t0.region.contains(X, Y)
        gap = float(np.max(U[ok] - U0[ok])) if ok.any() else float("nan")
        at_vertices = float(np.max(np.abs(np.asarray(t0.diagnostics["vertex_values"]) - z)))
        out.append({"triangle": [int(i) for i in tri], "max_excess": gap, "separated": bool(gap <= tol),
                    "vertex_mismatch": at_vertices})
    report["triangles"] = out
    report["separated"] = all(t["separated"] for t in out)
    return report
