"""Monge-Ampere solutions over ideal triangles and their cross-check against the development."""

from __future__ import annotations

import math

import numpy as np

from ..masolver.exhaustion import exhaustion_solve
from ..masolver.problem import SupportSolution
from ..regions import BoundaryFunction
from .bochner import BochnerProfile
from .develop import develop_ray

# support value of the developed surface on the boundary of its Gauss image
EDGE_LIMIT_RADIUS = 8.0


def _vertex_angles(vertices):
    V = np.asarray(vertices, float).reshape(3, 2)
    r = np.hypot(V[:, 0], V[:, 1])
    if np.abs(r - 1.0).max() > 1e-9:
        raise ValueError("triangle vertices must lie on the unit circle")
    ang = np.degrees(np.arctan2(V[:, 1], V[:, 0])) % 360.0
    if len({round(a, 9) for a in ang}) < 3:
        raise ValueError("triangle vertices must be distinct")
    return ang


def triangle_phi(vertices, values) -> BoundaryFunction:
    ang = _vertex_angles(vertices)
    return BoundaryFunction.from_pairs([(a, float(v)) for a, v in zip(ang, values)])


def triangular_support(K: float, vertices, values, n: int = 201, levels: int = 6, **kw) -> SupportSolution:
    """Curvature-K solution over the ideal triangle with the given vertex values.

    Boundary data are the affine interpolant of ``values`` along the edges
    (the convex envelope of the three-node datum).
    """
    if K <= 0:
        raise ValueError("K must be positive")
    phi = triangle_phi(vertices, values)
    sol = exhaustion_solve(phi, psi=float(K), levels=levels, n=n, K_constant=float(K), **kw)
    sol.diagnostics["vertex_values"] = [float(v) for v in phi.finite_values()]
    sol.diagnostics["edge_trace"] = edge_trace(sol)
    return sol


def edge_trace(sol: SupportSolution, tol: float = 1e-9) -> dict:
    """Largest |u - conv(phi)| over grid nodes lying on the edges of the domain."""
    X, Y = sol.u.mesh()
    closed = sol.region.contains(X, Y, closed=True, tol=tol)
    inner = sol.region.contains(X, Y, tol=tol)
    on = closed & ~inner & np.isfinite(sol.u.values)
    if not on.any():
        return {"nodes": 0, "max_abs": float("nan")}
    from ..convexity import envelope_function
    env = np.asarray(envelope_function(sol.phi)(X[on], Y[on]), float)
    return {"nodes": int(on.sum()), "max_abs": float(np.abs(sol.u.values[on] - env).max())}


def developed_support_samples(profile: BochnerProfile, thetas=None, radii=(0.05, 0.2, 0.5, 1.0, 1.5),
                              edge_radius: float = EDGE_LIMIT_RADIUS, step: float = 0.01):
    """Gauss points and normalised support values of the developed surface.

    Support values u(x) = <sigma, (x, 1)> along z-rays, shifted by the limit
    value along the ray of argument pi (toward an edge midpoint) so that the
    sampled function vanishes on the edges. Returns (points, values, shift).
    """
    thetas = np.linspace(0.0, 2 * math.pi / 3, 7) if thetas is None else np.asarray(thetas, float)
    edge = develop_ray(profile, math.pi, [edge_radius], step=step, gram_tol=1.0)
    shift = float(edge.support_values()[-1])
    pts, vals = [], []
    for th in thetas:
        d = develop_ray(profile, float(th), list(radii), step=step, gram_tol=1.0)
        pts.append(d.gauss_points())
        vals.append(d.support_values() - shift)
    return np.vstack(pts), np.concatenate(vals), shift


def cross_validate(sol, profile: BochnerProfile, thetas=None, radii=(0.05, 0.2, 0.5, 1.0, 1.5),
                   tol: float = 2e-2) -> dict:
    """Compare the symmetric triangle solution with the developed surface's support values.

    ``sol`` is a SupportSolution for zero data at 0, 120, 240 degrees and
    K = 1, or any callable (x, y) -> u normalised to that case.
    """
    sample = sol if callable(sol) else sol.u.sample
    pts, vals, shift = developed_support_samples(profile, thetas, radii)
    mine = np.array([float(sample(x, y)) for x, y in pts])
    ok = np.isfinite(mine)
    diff = mine[ok] - vals[ok]
    return {
        "samples": int(ok.sum()),
        "max_abs_diff": float(np.abs(diff).max()) if ok.any() else float("nan"),
        "mean_diff": float(diff.mean()) if ok.any() else float("nan"),
        "edge_shift": shift,
        "points": pts[ok].tolist(),
        "developed": vals[ok].tolist(),
        "solution": mine[ok].tolist(),
        "passed": bool(ok.sum() >= 20 and np.abs(diff).max() <= tol),
    }


def symmetry_check(profile: BochnerProfile, radii=(0.1, 0.5, 1.0, 2.0), thetas=(0.3, 0.9)) -> dict:
    """Support samples on rays theta and theta + 2pi/3 agree after a 120 degree rotation."""
    worst_val, worst_pt = 0.0, 0.0
    c, s = math.cos(2 * math.pi / 3), math.sin(2 * math.pi / 3)
    Rm = np.array([[c, -s], [s, c]])
    for th in thetas:
        a = develop_ray(profile, th, list(radii), gram_tol=1.0)
        b = develop_ray(profile, th + 2 * math.pi / 3 - (2 * math.pi if th + 2 * math.pi / 3 > math.pi else 0.0),
                        list(radii), gram_tol=1.0)
        pa = a.gauss_points() @ Rm.T
        worst_pt = max(worst_pt, float(np.abs(pa - b.gauss_points()).max()))
        worst_val = max(worst_val, float(np.abs(a.support_values() - b.support_values()).max()))
    return {"max_point_diff": worst_pt, "max_value_diff": worst_val}
