"""Monge-Ampere Dirichlet problems on convex subregions of the disk."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import NonConvergence, NotStrictlyInside
from ..fields import DiskField, grid_axis
from ..regions import BoundaryFunction, PlanarConvexRegion
from .discrete import OFFS, SolveInfo, Stencil, bfo_iterate, convexify, monotone_solve, newton_obstacle

DEFAULT_TOL = 1e-10


def density(psi, X, Y):
    """nu = (1/psi) (1 - |x|^2)^-2, +inf on and outside the circle."""
    w = 1.0 - X * X - Y * Y
    with np.errstate(divide="ignore"):
        return np.where(w > 0, 1.0 / (psi * np.where(w > 0, w, 1.0) ** 2), np.inf)


def psi_grid(psi, n):
    """Constant, callable or n x n array -> n x n array."""
    a = grid_axis(n)
    X, Y = np.meshgrid(a, a, indexing="ij")
    if callable(psi):
        return np.broadcast_to(np.asarray(psi(X, Y), float), X.shape).copy()
    arr = np.asarray(psi, dtype=float)
    if arr.ndim == 0:
        return np.full(X.shape, float(arr))
    if arr.shape != X.shape:
        raise ValueError(f"psi grid has shape {arr.shape}, expected {X.shape}")
    return arr.copy()


@dataclass
class MAProblem:
    """det D2u = nu on the interior grid nodes of ``region``.

    ``boundary`` holds u on every node outside the region that a stencil
    touches. ``reference`` is an arbitrary finite function subtracted before the
    lam factorisation (the convex envelope in the exhaustion). ``lower`` and
    ``upper`` are optional obstacles for u.
    """

    region: PlanarConvexRegion
    n: int
    psi: object = 1.0
    boundary: np.ndarray | None = None
    reference: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    initial: np.ndarray | None = None
    K_constant: float | None = None
    tol: float = DEFAULT_TOL
    rtol: float = 1e-9
    bfo_tol: float = 1e-7
    bfo_iterations: int = 5000
    backend: str = "auto"
    convexify: bool = True
    lines: tuple | None = None
    theta_min: float = 0.1
    exclude: np.ndarray | None = None

    def __post_init__(self):
        self.psi_values = psi_grid(self.psi, self.n)
        a = grid_axis(self.n)
        X, Y = np.meshgrid(a, a, indexing="ij")
        self.X, self.Y = X, Y
        inside = self.region.contains(X, Y)
        self.interior = inside & (X * X + Y * Y < 1.0 - 1e-12)
        if self.exclude is not None:
            self.interior &= ~np.asarray(self.exclude, bool)
        vals = self.psi_values[self.interior]
        if vals.size and (not np.isfinite(vals).all() or vals.min() <= 0):
            raise ValueError("psi must be finite and positive on the region")
        self.a = float(vals.min()) if vals.size else 1.0
        self.b = float(vals.max()) if vals.size else 1.0
        if self.backend not in ("auto", "newton", "monotone"):
            raise ValueError("backend must be auto, newton or monotone")


@dataclass
class SupportSolution:
    u: DiskField
    region: PlanarConvexRegion
    phi: BoundaryFunction
    diagnostics: dict = field(default_factory=dict)


def _ring(interior):
    ring = np.zeros_like(interior)
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1), (1, -1), (-1, 1)):
        ring |= np.roll(np.roll(interior, di, 0), dj, 1)
    return ring & ~interior


def line_cuts(interior, X, Y, h, lines, theta_min):
    """Cut data for stencil arms crossing Dirichlet lines.

    Returns (interior_without_pinned, pinned, cuts) where cuts[k] = (mask, factor)
    over the remaining interior nodes in row-major order.
    """
    N = np.asarray(lines[0], float).reshape(-1, 2)
    B = np.asarray(lines[1], float).reshape(-1)
    interior = interior.copy()
    pinned = np.zeros_like(interior)
    while True:
        I, J = np.nonzero(interior)
        px, py = X[I, J], Y[I, J]
        thetas = []
        for di, dj in OFFS[1:]:
            dx, dy = di * h, dj * h
            th = np.full(I.size, np.inf)
            for (nx, ny), b in zip(N, B):
                step = nx * dx + ny * dy
                if step <= 0:
                    continue
                over = nx * (px + dx) + ny * (py + dy) - b > 1e-12
                t = (b - (nx * px + ny * py)) / step
                th = np.where(over, np.minimum(th, t), th)
            # arms reaching the circle: q is closed to 0 there (u = reference at an ideal vertex)
            gx, gy = px + dx, py + dy
            out = gx * gx + gy * gy >= 1.0 - 1e-12
            if out.any():
                a2 = dx * dx + dy * dy
                b2 = px * dx + py * dy
                c2 = px * px + py * py - 1.0
                t = (-b2 + np.sqrt(np.maximum(b2 * b2 - a2 * c2, 0.0))) / a2
                th = np.where(out, np.minimum(th, t), th)
            thetas.append(th)
        T = np.array(thetas)
        bad = (T < theta_min).any(axis=0)
        if not bad.any():
            break
        interior[I[bad], J[bad]] = False
        pinned[I[bad], J[bad]] = True
    cuts = {}
    for k, th in enumerate(T, start=1):
        mask = np.isfinite(th)
        if mask.any():
            safe = np.where(mask, th, 1.0)
            cuts[k] = (mask, np.where(mask, -(1.0 - safe) / safe, 0.0))
    return interior, pinned, cuts


def dirichlet_solve(problem: MAProblem) -> DiskField:
    """Solve the discrete Dirichlet (or double-obstacle) problem.

    Damped Newton, initialised by a projected fixed point, with a monotone
    wide-stencil Gauss-Seidel fallback. Diagnostics go to ``meta``.
    """
    t0 = time.perf_counter()
    p = problem
    if p.lines is None and p.region.max_radius >= 1.0 - 1e-12:
        raise NotStrictlyInside("region touches the unit circle")
    n = p.n
    h = 2.0 / (n - 1)
    X, Y = p.X, p.Y
    interior = p.interior.copy()
    pinned = np.zeros_like(interior)
    cuts = None
    if p.lines is not None:
        interior, pinned, cuts = line_cuts(interior, X, Y, h, p.lines, p.theta_min)
    if interior[0, :].any() or interior[-1, :].any() or interior[:, 0].any() or interior[:, -1].any():
        raise NotStrictlyInside("region reaches the grid border")
    ring = _ring(interior)
    if cuts:
        # neighbours across a line are extrapolated, not read
        for k, (mask, _) in cuts.items():
            di, dj = OFFS[k]
            I, J = np.nonzero(interior)
            gi, gj = I[mask] + di, J[mask] + dj
            keep = pinned[gi, gj] | interior[gi, gj]
            ring[gi[~keep], gj[~keep]] = False
        ring |= pinned
        ring &= ~interior
        ring = _ring_used(interior, ring, cuts)
    if (X[ring] ** 2 + Y[ring] ** 2 >= 1.0).any():
        raise NotStrictlyInside("stencil ring leaves the open disk")

    ref = np.zeros((n, n)) if p.reference is None else np.asarray(p.reference, float)
    bnd = np.asarray(p.boundary, float) if p.boundary is not None else None
    if bnd is not None and pinned.any():
        bnd = np.where(pinned, ref, bnd)
    if bnd is None or not np.isfinite(bnd[ring]).all() or not np.isfinite(ref[_ring(interior) | interior]).all():
        raise ValueError("boundary and reference data must be finite on the stencil ring")

    nu_full = density(p.psi_values, X, Y)
    nu = nu_full[interior]
    lam = np.sqrt(np.maximum(1.0 - X * X - Y * Y, 0.0))
    live = interior | ring
    safe = np.where(live, lam, 1.0)

    def to_q(u):
        return np.where(live, (u - ref) / safe, 0.0)

    lo_u = np.full((n, n), -np.inf) if p.lower is None else np.asarray(p.lower, float)
    hi_u = np.full((n, n), np.inf) if p.upper is None else np.asarray(p.upper, float)
    lo_q = np.where(interior & np.isfinite(lo_u), to_q(np.where(np.isfinite(lo_u), lo_u, 0.0)), -np.inf)[interior]
    hi_q = np.where(interior & np.isfinite(hi_u), to_q(np.where(np.isfinite(hi_u), hi_u, 0.0)), np.inf)[interior]
    if (lo_q > hi_q + 1e-14).any():
        raise ValueError("lower obstacle exceeds upper obstacle")
    hi_q = np.maximum(hi_q, lo_q)

    Q = to_q(np.where(ring, bnd, 0.0))
    if p.initial is not None:
        init = np.asarray(p.initial, float)
        ok = interior & np.isfinite(init)
        Q[ok] = to_q(np.where(ok, init, 0.0))[ok]
        Q[interior & ~np.isfinite(init)] = 0.0
    Q[interior] = np.clip(Q[interior], lo_q, hi_q)

    st = Stencil(interior, X, Y, h, ref, cuts)
    info = SolveInfo()
    if p.backend != "monotone" and st.m:
        Q, it, d = bfo_iterate(st, Q, nu, lo_q, hi_q, p.bfo_iterations, p.bfo_tol)
        Q2, info = newton_obstacle(st, Q, nu, lo_q, hi_q, p.tol, p.rtol)
        info.bfo_iterations = it
        if info.converged:
            Q = Q2
        elif p.backend == "newton":
            u = ref + lam * Q2
            raise NonConvergence("Newton did not converge", best=u, residual=info.residual)
        else:
            info.notes.append("falling back to the monotone scheme")
    U = np.full((n, n), np.inf)
    U[ring] = bnd[ring]
    U[pinned] = ref[pinned]
    U[interior] = (ref + lam * Q)[interior]
    if p.backend == "monotone" or not info.converged:
        backend_before = info
        U, info = monotone_solve(U, interior, nu, h, lo_u, hi_u, p.tol)
        info.backend = "monotone"
        info.bfo_iterations = backend_before.bfo_iterations
        info.newton_iterations = backend_before.newton_iterations
        info.notes = backend_before.notes + info.notes
        if not info.converged:
            raise NonConvergence("monotone scheme did not converge", best=U, residual=info.residual)
        info.residual = _monotone_residual(U, interior, nu, h)
    changed, drop = 0, 0.0
    if p.convexify:
        U, changed, drop = convexify(U, interior)
    meta = {"pinned": int(pinned.sum()), "solve": info.as_dict(), "convexified_nodes": changed, "convexified_max": drop, "seconds": time.perf_counter() - t0,
            "nodes": int(interior.sum()), "a": p.a, "b": p.b}
    if p.K_constant is not None:
        meta["K"] = p.K_constant
    return DiskField(U, region=p.region, closed_convex=True, meta=meta)


def _ring_used(interior, ring, cuts):
    """Ring nodes actually read by some uncut stencil arm."""
    used = np.zeros_like(ring)
    I, J = np.nonzero(interior)
    for k, (di, dj) in enumerate(OFFS):
        if k == 0:
            continue
        m = np.ones(I.size, bool) if k not in cuts else ~cuts[k][0]
        used[I[m] + di, J[m] + dj] = True
    return ring & used


def _monotone_residual(U, interior, nu, h):
    I, J = np.nonzero(interior)
    a = (U[I + 1, J] - 2 * U[I, J] + U[I - 1, J]) / h ** 2
    b = (U[I, J + 1] - 2 * U[I, J] + U[I, J - 1]) / h ** 2
    c = (U[I + 1, J + 1] + U[I - 1, J - 1] - U[I + 1, J - 1] - U[I - 1, J + 1]) / (4 * h * h)
    return float(np.abs((a * b - c * c - nu) / nu).max())


def discrete_convexity(U, mask=None):
    """Smallest axis and diagonal second difference among fully finite triples."""
    fin = np.isfinite(U)
    worst = np.inf
    n = U.shape[0]
    for di, dj in ((1, 0), (0, 1), (1, 1), (1, -1)):
        i0, i1 = (1, n - 1) if di else (0, n)
        j0, j1 = (1, n - 1) if dj else (0, n)
        c = U[i0:i1, j0:j1]
        pl = U[i0 + di:i1 + di, j0 + dj:j1 + dj]
        mi = U[i0 - di:i1 - di, j0 - dj:j1 - dj]
        ok = fin[i0:i1, j0:j1] & np.isfinite(pl) & np.isfinite(mi)
        if mask is not None:
            ok &= mask[i0:i1, j0:j1]
        if ok.any():
            with np.errstate(invalid="ignore"):
                worst = min(worst, float((pl + mi - 2 * c)[ok].min()))
    return worst
