"""Discrete Monge-Ampere operators on the uniform disk grid.

The unknown is written u = href + lam * q with lam = sqrt(1 - |x|^2). The
Hessian of lam * q uses the product rule with exact derivatives of lam and a
9-point stencil for q, so the hyperboloid (q constant) is reproduced exactly.
Bounds lo <= q <= hi turn the equation into a double-obstacle problem.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu, spsolve

OFFS = ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1), (1, -1), (-1, 1))


def lam_derivatives(X, Y):
    L = np.sqrt(1.0 - X * X - Y * Y)
    L3 = L ** 3
    return L, -X / L, -Y / L, -(1 - Y * Y) / L3, -(1 - X * X) / L3, -X * Y / L3


class Stencil:
    """Product-rule Hessian of lam*q plus a 9-point Hessian of href.

    ``cuts`` (optional) maps offset index k to (mask, factor): for nodes in
    mask the neighbour k lies across a Dirichlet line where q = 0, and its q is
    replaced by factor * q(centre), the linear extrapolation through the
    crossing point.
    """

    def __init__(self, interior, X, Y, h, href, cuts=None):
        self.interior = interior
        self.shape = interior.shape
        ii = np.argwhere(interior)
        self.I, self.J = ii[:, 0], ii[:, 1]
        self.m = len(ii)
        self.idx = -np.ones(self.shape, int)
        self.idx[interior] = np.arange(self.m)
        I, J = self.I, self.J
        L, lx, ly, lxx, lyy, lxy = lam_derivatives(X[I, J], Y[I, J])
        self.L = L
        z = np.zeros(self.m)
        h2 = h * h
        self.cxx = [lxx - 2 * L / h2, L / h2 + lx / h, L / h2 - lx / h, z, z, z, z, z, z]
        self.cyy = [lyy - 2 * L / h2, z, z, L / h2 + ly / h, L / h2 - ly / h, z, z, z, z]
        self.cxy = [lxy, ly / (2 * h), -ly / (2 * h), lx / (2 * h), -lx / (2 * h),
                    L / (4 * h2), L / (4 * h2), -L / (4 * h2), -L / (4 * h2)]
        hv = [href[I + di, J + dj] for di, dj in OFFS]
        self.hxx = (hv[1] - 2 * hv[0] + hv[2]) / h2
        self.hyy = (hv[3] - 2 * hv[0] + hv[4]) / h2
        self.hxy = (hv[5] + hv[6] - hv[7] - hv[8]) / (4 * h2)
        self.nbr = [self.idx[I + di, J + dj] for di, dj in OFFS]
        self.cuts = cuts or {}
        for k, (mask, _) in self.cuts.items():
            self.nbr[k] = np.where(mask, -2, self.nbr[k])

    def gather(self, Q):
        v = [Q[self.I + di, self.J + dj] for di, dj in OFFS]
        for k, (mask, f) in self.cuts.items():
            v[k] = np.where(mask, f * v[0], v[k])
        return v

    def fold(self, coefs):
        """Move coefficients of cut neighbours onto the centre."""
        coefs = list(coefs)
        for k, (mask, f) in self.cuts.items():
            coefs[0] = coefs[0] + np.where(mask, f * coefs[k], 0.0)
            coefs[k] = np.where(mask, 0.0, coefs[k])
        return coefs

    def hessian(self, Q):
        v = self.gather(Q)
        a = self.hxx + sum(c * x for c, x in zip(self.cxx, v))
        b = self.hyy + sum(c * x for c, x in zip(self.cyy, v))
        c = self.hxy + sum(c * x for c, x in zip(self.cxy, v))
        return a, b, c

    def matrix(self, coefs):
        coefs = self.fold(coefs)
        rows, cols, vals = [], [], []
        ar = np.arange(self.m)
        for k in range(9):
            kk = self.nbr[k]
            ok = kk >= 0
            rows.append(ar[ok])
            cols.append(kk[ok])
            vals.append(coefs[k][ok])
        return sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(self.m, self.m))

    def fixed_part(self, coefs, Q):
        """Contribution of the fixed (non-unknown, uncut) neighbours."""
        v = [Q[self.I + di, self.J + dj] for di, dj in OFFS]
        out = np.zeros(self.m)
        for k in range(9):
            ext = self.nbr[k] == -1
            out += np.where(ext, coefs[k] * np.where(ext, v[k], 0.0), 0.0)
        return out


@dataclass
class SolveInfo:
    backend: str = "newton"
    bfo_iterations: int = 0
    newton_iterations: int = 0
    active_set_rounds: int = 0
    monotone_sweeps: int = 0
    residual: float = np.inf
    step: float = np.inf
    contact_lower: int = 0
    contact_upper: int = 0
    converged: bool = False
    notes: list = field(default_factory=list)

    def as_dict(self):
        return dict(self.__dict__)


def bfo_iterate(st: Stencil, Q, nu, lo, hi, iters, tol):
    """Projected fixed point  tr H(q_new) = sqrt((Hxx - Hyy)^2 + 4 Hxy^2 + 4 nu)."""
    tr = [a + b for a, b in zip(st.cxx, st.cyy)]
    solver = splu(st.matrix(tr))
    Q = Q.copy()
    base = st.fixed_part(tr, Q) + st.hxx + st.hyy
    d = np.inf
    it = 0
    for it in range(1, iters + 1):
        a, b, c = st.hessian(Q)
        rhs = np.sqrt((a - b) ** 2 + 4 * c * c + 4 * nu)
        new = np.clip(solver.solve(rhs - base), lo, hi)
        d = float(np.abs(new - Q[st.I, st.J]).max())
        Q[st.I, st.J] = new
        if d < tol:
            break
    return Q, it, d


def _residual(st, Q, nu):
    a, b, c = st.hessian(Q)
    return a * b - c * c - nu, a, b, c


def newton_obstacle(st: Stencil, Q, nu, lo, hi, tol, rtol, maxit=60, max_rounds=30):
    """Primal-dual active set iteration wrapped around damped Newton.

    Returns (Q, info). info.converged is False when Newton stalls.
    """
    info = SolveInfo()
    Q = Q.copy()
    q = Q[st.I, st.J]
    scale = 1.0 / nu
    at_lo = q <= lo
    at_hi = q >= hi
    for rnd in range(1, max_rounds + 1):
        info.active_set_rounds = rnd
        active = at_lo | at_hi
        Q[st.I, st.J] = np.where(at_lo, lo, np.where(at_hi, hi, Q[st.I, st.J]))
        free = ~active
        ok = _newton_free(st, Q, nu, free, tol, rtol, maxit, info)
        if not ok:
            return Q, info
        F, a, b, c = _residual(st, Q, nu)
        q = Q[st.I, st.J]
        # the equation pushes q down where F < 0 and up where F > 0
        new_lo = (at_lo & (F <= 0)) | (free & (q < lo))
        new_hi = (at_hi & (F >= 0)) | (free & (q > hi))
        if (new_lo == at_lo).all() and (new_hi == at_hi).all():
            info.residual = float(np.abs(F[free] * scale[free]).max()) if free.any() else 0.0
            info.contact_lower = int(at_lo.sum())
            info.contact_upper = int(at_hi.sum())
            info.converged = True
            return Q, info
        at_lo, at_hi = new_lo, new_hi & ~new_lo
    info.notes.append("active set did not settle")
    return Q, info


def _newton_free(st, Q, nu, free, tol, rtol, maxit, info):
    if not free.any():
        return True
    w = 1.0 / np.sqrt(nu)
    fidx = np.flatnonzero(free)
    for _ in range(maxit):
        info.newton_iterations += 1
        F, a, b, c = _residual(st, Q, nu)
        Fw = F * w
        r0 = np.linalg.norm(Fw[free])
        A = st.matrix([b * st.cxx[k] + a * st.cyy[k] - 2 * c * st.cxy[k] for k in range(9)]).tocsr()
        A = A[fidx][:, fidx]
        d = spsolve(A.tocsc(), -F[free])
        t = 1.0
        while t > 1e-10:
            V = Q.copy()
            V[st.I[fidx], st.J[fidx]] += t * d
            F1, a1, b1, _ = _residual(st, V, nu)
            if np.linalg.norm((F1 * w)[free]) < (1 - 1e-4 * t) * r0 and (a1 > 0).all() and (b1 > 0).all():
                break
            t *= 0.5
        else:
            info.notes.append("line search failed")
            info.residual = float(np.abs(F[free] / nu[free]).max())
            return False
        Q[:] = V
        step = float(np.abs(t * d).max())
        info.step = step
        res = float(np.abs(F1[free] / nu[free]).max())
        info.residual = res
        if step < tol and res < rtol:
            return True
        if res < 1e-3 * rtol:
            return True
    info.notes.append("newton iteration cap reached")
    return False


# monotone wide-stencil fallback ----------------------------------------------

_PAIRS = (((1, 0), (0, 1)), ((1, 1), (1, -1)), ((2, 1), (-1, 2)), ((1, 2), (-2, 1)))


def monotone_solve(U, interior, nu, h, lo, hi, tol, max_sweeps=200000, info=None):
    """Gauss-Seidel on min over orthogonal pairs of directional second differences.

    U is the full grid of values (interior nodes are updated in place on a copy);
    lo, hi are full-grid obstacles.
    """
    info = info or SolveInfo()
    U = U.copy()
    n = U.shape[0]
    fin = np.isfinite(U)
    ii = np.argwhere(interior)
    colours = [ii[(ii[:, 0] % 3 == ci) & (ii[:, 1] % 3 == cj)] for ci in range(3) for cj in range(3)]
    nu_full = np.zeros(U.shape)
    nu_full[interior] = nu

    def pair_data(I, J, v):
        i1, j1, i2, j2 = I + v[0], J + v[1], I - v[0], J - v[1]
        inb = (i1 >= 0) & (i1 < n) & (j1 >= 0) & (j1 < n) & (i2 >= 0) & (i2 < n) & (j2 >= 0) & (j2 < n)
        c1 = np.clip(i1, 0, n - 1), np.clip(j1, 0, n - 1)
        c2 = np.clip(i2, 0, n - 1), np.clip(j2, 0, n - 1)
        okv = inb & fin[c1] & fin[c2]
        return okv, c1, c2

    tables = []
    for col in colours:
        I, J = col[:, 0], col[:, 1]
        entries = []
        for v, w in _PAIRS:
            okv, a1, a2 = pair_data(I, J, v)
            okw, b1, b2 = pair_data(I, J, w)
            entries.append((okv & okw, a1, a2, b1, b2, float(v[0] ** 2 + v[1] ** 2)))
        tables.append((I, J, entries))

    for sweep in range(1, max_sweeps + 1):
        change = 0.0
        for I, J, entries in tables:
            if I.size == 0:
                continue
            best = np.full(I.size, np.inf)
            c = nu_full[I, J] * h ** 4
            for ok, a1, a2, b1, b2, s2 in entries:
                # masked-out pairs may read inf on both sides; their nan is discarded below
                with np.errstate(invalid="ignore"):
                    A = 0.5 * (U[a1] + U[a2])
                    B = 0.5 * (U[b1] + U[b2])
                    u0 = 0.5 * (A + B) - np.sqrt(0.25 * (A - B) ** 2 + 0.25 * c * s2 * s2)
                best = np.where(ok, np.minimum(best, u0), best)
            new = np.clip(best, lo[I, J], hi[I, J])
            change = max(change, float(np.abs(new - U[I, J]).max()))
            U[I, J] = new
        if change < tol:
            info.monotone_sweeps = sweep
            info.converged = True
            return U, info
    info.monotone_sweeps = max_sweeps
    info.converged = False
    return U, info


# convexification safeguard -----------------------------------------------------

_DIRS = ((1, 0), (0, 1), (1, 1), (1, -1))


def convexify(U, movable, max_iter=100000, tol=1e-13):
    """Largest grid function below U with non-negative axis and diagonal second differences.

    Only nodes in ``movable`` are lowered. Returns (U_new, changed_nodes, max_drop).
    """
    with np.errstate(invalid="ignore"):
        return _convexify(U, movable, max_iter, tol)


def _convexify(U, movable, max_iter, tol):
    V = U.copy()
    fin = np.isfinite(V)
    n = V.shape[0]
    core = np.zeros_like(fin)
    core[1:-1, 1:-1] = True
    mov = movable & fin & core
    pairs = []
    for di, dj in _DIRS:
        ok = np.zeros_like(fin)
        ok[1:-1, 1:-1] = fin[2:, 1 + dj:n - 1 + dj] & fin[:-2, 1 - dj:n - 1 - dj] if di else \
            fin[1:-1, 2:] & fin[1:-1, :-2]
        pairs.append(((di, dj), ok & mov))
    for _ in range(max_iter):
        best = V.copy()
        for (di, dj), ok in pairs:
            if not ok.any():
                continue
            avg = np.full(V.shape, np.inf)
            avg[1:-1, 1:-1] = 0.5 * (np.roll(np.roll(V, -di, 0), -dj, 1)[1:-1, 1:-1]
                                     + np.roll(np.roll(V, di, 0), dj, 1)[1:-1, 1:-1])
            best = np.where(ok, np.minimum(best, avg), best)
        drop = np.where(mov, V - best, 0.0)
        V = np.where(mov, best, V)
        if drop.max() <= tol:
            break
    changed = mov & (np.where(fin, U, 0.0) - np.where(fin, V, 0.0) > 0)
    return V, int(changed.sum()), float(np.where(changed, U - V, 0.0).max(initial=0.0))
