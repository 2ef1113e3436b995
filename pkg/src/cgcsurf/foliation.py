"""Constant-curvature foliations of a regular domain and the K-time function."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import extended
from .convexity import domain_membership
from .errors import BracketFailure, NotRegular
from .masolver.exhaustion import exhaustion_solve
from .masolver.pipeline import minkowski_solve
from .masolver.problem import DEFAULT_TOL, SupportSolution
from .regions import BoundaryFunction

ORDER_SLACK = 1e-8
TOUCH_FACTOR = 5.0


def _solve(phi, K, n, levels, R=None, mesh_n=65):
    if R is None:
        return exhaustion_solve(phi, psi=K, levels=levels, n=n, K_constant=K), None
    return minkowski_solve(phi, psi=K, R=R, n=n, levels=levels, mesh_n=mesh_n)


def _core_mask(sol: SupportSolution, depth: float):
    """Finite nodes of the region lying at least ``depth`` inside every edge and the circle."""
    X, Y = sol.u.mesh()
    m = sol.u.finite & sol.region.contains(X, Y)
    Nn, b = sol.region.halfplanes()
    for (nx, ny), c in zip(np.asarray(Nn).reshape(-1, 2), np.asarray(b).reshape(-1)):
        m &= nx * X + ny * Y <= c - depth
    return m & (np.hypot(X, Y) <= 1 - depth)


@dataclass(frozen=True)
class FoliationRun:
    phi: BoundaryFunction
    K_list: tuple
    solutions: tuple
    meshes: tuple = ()
    margins: dict = field(default_factory=dict)

    def summary(self):
        out = []
        for i, (K, s) in enumerate(zip(self.K_list, self.solutions)):
            nxt = self.margins.get((i, i + 1)) if i + 1 < len(self.K_list) else None
            out.append({"K": K, "residual": s.diagnostics.get("residual"),
                        "ordering_margin": None if nxt is None else nxt["min_all"],
                        "interior_margin": None if nxt is None else nxt["min_core"]})
        return out

    def write_summary(self, path):
        with open(path, "w") as fh:
            json.dump(extended.jsonable(self.summary()), fh, indent=2)

    def margin_function(self, p):
        """m(K) = min over finite nodes of u_K - <p, (y, 1)> for each K of the run."""
        return np.array([plane_margin(s, p) for s in self.solutions])


def k_sweep(phi: BoundaryFunction, K_list, n: int = 129, levels: int = 6, R=None,
            core_depth: float = 0.05) -> FoliationRun:
    """Solve for each K and record the pointwise ordering of consecutive support functions."""
    Ks = tuple(sorted(float(k) for k in K_list))
    if not Ks or Ks[0] <= 0:
        raise ValueError("K values must be positive")
    if len(set(Ks)) != len(Ks):
        raise ValueError("K values must be distinct")
    sols, meshes = [], []
    for K in Ks:
        s, m = _solve(phi, K, n, levels, R)
        sols.append(s)
        if m is not None:
            meshes.append(m)
    margins = {}
    for i in range(len(Ks)):
        for j in range(i + 1, len(Ks)):
            a, b = sols[i], sols[j]
            both = a.u.finite & b.u.finite
            d = b.u.values[both] - a.u.values[both]
            core = _core_mask(a, core_depth) & both
            margins[(i, j)] = {
                "min_all": float(d.min()),
                "min_core": float((b.u.values[core] - a.u.values[core]).min()) if core.any() else float("nan"),
                "ordered": bool(d.min() >= -ORDER_SLACK),
            }
    return FoliationRun(phi, Ks, tuple(sols), tuple(meshes), margins)


def plane_margin(sol: SupportSolution, p) -> float:
    """min over finite nodes of u(y) - <p, (y, 1)>; positive means p lies in the future of the surface."""
    X, Y = sol.u.mesh()
    f = sol.u.finite
    p = np.asarray(p, float)
    return float((sol.u.values[f] - (p[0] * X[f] + p[1] * Y[f] - p[2])).min())


@dataclass(frozen=True)
class KTime:
    point: tuple
    K: float
    tau: float
    margin: float
    evaluations: int
    bracket: tuple


def k_time(phi: BoundaryFunction, p, K_bracket=(0.1, 10.0), tol: float = 1e-4, n: int = 129,
           levels: int = 6, solver_tol: float = DEFAULT_TOL) -> KTime:
    """K of the leaf through p, by root-finding on the plane margin in log K.

    The margin increases with K (support functions grow with K); the point is
    on the leaf where it vanishes. A margin within 5 solver tolerances counts as
    touching.
    """
    if not domain_membership(phi, p):
        raise NotRegular("point lies outside the domain of dependence")
    cache = {}

    def m(logK):
        if logK not in cache:
            cache[logK] = plane_margin(_solve(phi, math.exp(logK), n, levels)[0], p)
        return cache[logK]

    lo, hi = math.log(K_bracket[0]), math.log(K_bracket[1])
    for expand in range(3):
        mlo, mhi = m(lo), m(hi)
        touch = TOUCH_FACTOR * solver_tol
        if abs(mlo) <= touch:
            return _result(p, lo, mlo, cache)
        if abs(mhi) <= touch:
            return _result(p, hi, mhi, cache)
        if mlo < 0 < mhi:
            break
        if expand == 2:
            raise BracketFailure(f"no membership flip in K bracket [{math.exp(lo):.6g}, {math.exp(hi):.6g}]")
        lo, hi = lo - math.log(10), hi + math.log(10)
    root = brentq(m, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps)
    return _result(p, root, m(root), cache, (math.exp(lo), math.exp(hi)))


def _result(p, logK, margin, cache, bracket=()):
    K = math.exp(logK)
    return KTime(tuple(float(c) for c in p), K, 1.0 / K, float(margin), len(cache), bracket)


def k_time_from_run(run: FoliationRun, p) -> float:
    """K of the leaf through p by linear interpolation of m(log K) across a sweep."""
    if len(run.K_list) < 2:
        raise ValueError("need at least two leaves")
    mk = run.margin_function(p)
    lk = np.log(run.K_list)
    s = np.flatnonzero((mk[:-1] < 0) & (mk[1:] >= 0))
    if s.size != 1:
        raise BracketFailure("margin does not change sign exactly once across the sweep")
    i = int(s[0])
    t = -mk[i] / (mk[i + 1] - mk[i])
    return float(math.exp(lk[i] + t * (lk[i + 1] - lk[i])))


def write_k_time_table(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x1", "x2", "x3", "K", "tau"])
        for r in rows:
            w.writerow([extended.fmt(v) for v in (*r.point, r.K, r.tau)])


def geometric_K_grid(K_min, K_max, factor=math.sqrt(2.0)):
    k = int(math.floor(math.log(K_max / K_min) / math.log(factor) + 1e-9))
    return [K_min * factor ** i for i in range(k + 1)]
