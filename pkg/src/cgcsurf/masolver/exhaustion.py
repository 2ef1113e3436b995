"""Exhaustion of Omega_phi by rounded, shrunken copies and the a priori barriers."""

from __future__ import annotations

import math
import time

import numpy as np
import shapely
import shapely.affinity

from ..barriers import Chord, chord_barrier_values
from ..convexity import DomainClass, classify_domain, envelope_function, gradient_coverage_radius
from ..errors import NotRegular, Wedge
from ..fields import DiskField, grid_axis
from ..regions import BoundaryFunction, PlanarConvexRegion, finiteness_hull
from .problem import DEFAULT_TOL, MAProblem, SupportSolution, dirichlet_solve, psi_grid

CAUCHY_FLOOR = 1e-4


def require_regular(phi: BoundaryFunction):
    cls = classify_domain(phi)
    if cls is DomainClass.NOT_REGULAR:
        raise NotRegular("boundary data has fewer than two finite nodes")
    if cls is DomainClass.WEDGE:
        raise Wedge("boundary data with exactly two finite nodes defines a wedge, which is excluded")


def barrier_data(phi: BoundaryFunction, a: float, n: int):
    """conv(phi), the hyperboloid lower bound and the chord-refined lower bound.

    Returns (env, hyp_lower, chord_lower, region) as full n x n arrays, +inf
    off the closed hull of the finite nodes.
    """
    region = finiteness_hull(phi)
    f = envelope_function(phi)
    ax = grid_axis(n)
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    env = np.asarray(f(X, Y), float)
    fin = np.isfinite(env)
    lam = np.sqrt(np.maximum(0.0, 1.0 - X * X - Y * Y))
    hyp = np.where(fin, env - lam / math.sqrt(a), np.inf)
    best = np.full(X.shape, -np.inf)
    xs, ys = X[fin], Y[fin]
    for p, q in region.chords():
        c = chord_barrier_values(xs, ys, a, Chord(tuple(p), tuple(q)))
        best[fin] = np.maximum(best[fin], c)
    chord = hyp.copy()
    if region.chords():
        chord[fin] = env[fin] + best[fin]
    return env, hyp, chord, region


def level_region(omega: PlanarConvexRegion, level: int, h: float) -> PlanarConvexRegion:
    """Omega_n: shrink toward the barycentre by 1 - 2^-n, round corners, keep clear of the rim."""
    poly = omega.shape
    c = omega.barycenter
    s = 1.0 - 2.0 ** (-level)
    P = shapely.affinity.scale(poly, s, s, origin=(float(c[0]), float(c[1])))
    r = 0.2 * omega.inradius * 2.0 ** (-level)
    P = P.buffer(-r, quad_segs=32).buffer(r, quad_segs=32)
    P = P.intersection(shapely.Point(0.0, 0.0).buffer(1.0 - h, quad_segs=512))
    P = P.intersection(poly.buffer(-1.5 * h, quad_segs=32))
    if P.is_empty or P.area == 0:
        raise ValueError(f"exhaustion level {level} is empty on this grid")
    return PlanarConvexRegion.from_shapely(P.convex_hull)


def closing_reference(omega: PlanarConvexRegion, env_fn, env, X, Y):
    """conv(phi) on the closed region, continued across each edge by odd reflection.

    Across an edge the continuation is 2 env(C) - env(M) with C the foot point
    and M the mirror image, which is the adjacent facet's plane wherever that
    facet reaches the mirror point.
    """
    ref = np.where(np.isfinite(env), env, 0.0)
    out = ~np.isfinite(env)
    if not out.any() or omega.flag != "full":
        return ref
    N, B = omega.halfplanes()
    S = X[..., None] * N[:, 0] + Y[..., None] * N[:, 1] - B
    k = S.argmax(axis=-1)
    I, J = np.nonzero(out)
    kk = k[I, J]
    d = S[I, J, kk]
    cx, cy = X[I, J] - d * N[kk, 0], Y[I, J] - d * N[kk, 1]
    mx, my = X[I, J] - 2 * d * N[kk, 0], Y[I, J] - 2 * d * N[kk, 1]
    vc = np.asarray(env_fn(cx, cy), float)
    vm = np.asarray(env_fn(mx, my), float)
    good = np.isfinite(vc) & np.isfinite(vm)
    ref[I[good], J[good]] = 2 * vc[good] - vm[good]
    return ref


def arc_band(omega: PlanarConvexRegion, X, Y, h, gap=2.0):
    """Nodes within gap*h of the circle next to edges that hug it (sagitta < gap*h).

    Such edges stand in for arcs of dense data; their nodes keep barrier values.
    Wedges between two edges that leave the circle are not part of the band.
    """
    band = np.zeros(X.shape, bool)
    if omega.flag != "full":
        return band
    R = np.hypot(X, Y)
    near = R > 1.0 - gap * h
    if not near.any():
        return band
    A = np.arctan2(Y, X)
    pts = omega.boundary_points()
    for p, q in zip(pts, np.roll(pts, -1, axis=0)):
        half = 0.5 * math.dist(p, q)
        sag = 1.0 - math.sqrt(max(1.0 - half * half, 0.0))
        if sag >= gap * h:
            continue
        a0, a1 = math.atan2(p[1], p[0]), math.atan2(q[1], q[0])
        span = (a1 - a0) % (2 * math.pi)
        pad = gap * h
        rel = (A - a0 + pad) % (2 * math.pi)
        band |= near & (rel <= span + 2 * pad)
    return band


def exhaustion_solve(phi: BoundaryFunction, psi=1.0, levels: int = 6, n: int = 129,
                     schedule=None, tol: float = DEFAULT_TOL, backend: str = "auto",
                     K_constant=None, close: bool = True, theta_min: float = 0.1) -> SupportSolution:
    """Solve on Omega_1 c Omega_2 c ... with barrier data, warm-starting each level.

    With ``close`` a last solve runs on every node of Omega_phi inside the
    disk of radius 1 - 2h; there the edges of Omega_phi carry the exact data
    conv(phi) through cut stencil arms, and only the nodes near the circle keep
    barrier values.
    """
    require_regular(phi)
    t0 = time.perf_counter()
    psi_vals = psi_grid(psi, n)
    h = 2.0 / (n - 1)
    env0 = np.isfinite(envelope_function(phi)(*np.meshgrid(grid_axis(n), grid_axis(n), indexing="ij")))
    a = float(psi_vals[env0].min())
    b = float(psi_vals[env0].max())
    env, hyp, lower, omega = barrier_data(phi, a, n)
    closed = np.isfinite(env)
    lower = np.maximum(lower, hyp)
    schedule = list(schedule) if schedule is not None else list(range(1, levels + 1))
    if not schedule or sorted(schedule) != schedule:
        raise ValueError("schedule must be a non-empty increasing list of levels")

    U = np.where(closed, lower, np.inf)
    records = []
    core = None
    prev = None
    for lev in schedule:
        reg = level_region(omega, lev, h)
        prob = MAProblem(reg, n, psi=psi_vals, boundary=np.where(closed, lower, np.inf),
                         reference=np.where(closed, env, 0.0),
                         lower=lower, upper=env, initial=np.maximum(U, lower),
                         K_constant=K_constant, tol=tol, backend=backend)
        field = dirichlet_solve(prob)
        solved = prob.interior
        U = np.where(solved, field.values, np.where(closed, lower, np.inf))
        if core is None:
            core = solved.copy()
        rec = {
            "level": lev,
            "nodes": int(solved.sum()),
            "residual": field.meta["solve"]["residual"],
            "backend": field.meta["solve"]["backend"],
            "contact_lower": field.meta["solve"]["contact_lower"],
            "contact_upper": field.meta["solve"]["contact_upper"],
            "newton_iterations": field.meta["solve"]["newton_iterations"],
            "bfo_iterations": field.meta["solve"]["bfo_iterations"],
            "seconds": field.meta["seconds"],
            "convexified_nodes": field.meta["convexified_nodes"],
            "convexified_max": field.meta["convexified_max"],
        }
        rec.update(sandwich_margins(U, env, hyp, lower))
        if prev is not None:
            rec["cauchy"] = float(np.abs(U[core] - prev[core]).max())
        records.append(rec)
        prev = U
    cauchy = [r["cauchy"] for r in records if "cauchy" in r]
    closing = None
    if close:
        env_fn = envelope_function(phi)
        ax = grid_axis(n)
        X, Y = np.meshgrid(ax, ax, indexing="ij")
        ref = closing_reference(omega, env_fn, env, X, Y)
        prob = MAProblem(omega, n, exclude=arc_band(omega, X, Y, h), psi=psi_vals, boundary=np.where(closed, lower, np.inf),
                         reference=ref, lower=lower, upper=env, initial=np.maximum(U, lower),
                         K_constant=K_constant, tol=tol, backend=backend,
                         lines=omega.halfplanes() if omega.flag == "full" else None,
                         theta_min=theta_min)
        field = dirichlet_solve(prob)
        solved = field.meta["nodes"]
        mask = np.isfinite(field.values) & closed
        U = np.where(mask, field.values, np.where(closed, lower, np.inf))
        closing = {
            "nodes": solved,
            "pinned": field.meta["pinned"],
            "residual": field.meta["solve"]["residual"],
            "backend": field.meta["solve"]["backend"],
            "contact_lower": field.meta["solve"]["contact_lower"],
            "contact_upper": field.meta["solve"]["contact_upper"],
            "newton_iterations": field.meta["solve"]["newton_iterations"],
            "seconds": field.meta["seconds"],
            "convexified_nodes": field.meta["convexified_nodes"],
            "convexified_max": field.meta["convexified_max"],
            "cauchy": float(np.abs(U[core] - prev[core]).max()),
        }
        closing.update(sandwich_margins(U, env, hyp, lower))
    diag = {
        "levels": records,
        "a": a,
        "b": b,
        "grid": n,
        "residual": (closing or records[-1])["residual"],
        "closing": closing,
        # heuristic monitor: differences below CAUCHY_FLOOR count as settled
        "cauchy_decreasing": all(y <= x or y <= CAUCHY_FLOOR for x, y in zip(cauchy, cauchy[1:])),
        "seconds": time.perf_counter() - t0,
    }
    last = closing or records[-1]
    diag.update({k: max(r[k] for r in records + ([closing] if closing else []))
                 for k in ("upper_violation", "lower_violation", "chord_violation")})
    diag["convexified_nodes"] = last["convexified_nodes"]
    diag["convexified_max"] = last["convexified_max"]
    sol = DiskField(U, region=omega, closed_convex=True,
                    meta={"phi": phi.pairs_degrees(), "K": K_constant, "grid": n})
    diag["coverage_radius"] = gradient_coverage_radius(sol)
    return SupportSolution(sol, omega, phi, diag)


def sandwich_margins(U, env, hyp, chord):
    fin = np.isfinite(U)
    return {
        "upper_violation": float(np.max(U[fin] - env[fin])),
        "lower_violation": float(np.max(hyp[fin] - U[fin])),
        "chord_violation": float(np.max(chord[fin] - U[fin])),
    }
