"""Property suite behind the ``verify`` command."""

from __future__ import annotations

import math
import time

import numpy as np
from shapely.geometry import Point, Polygon

from .barriers import Chord, chord_barrier_values, hyperboloid_support, hyperboloid_values
from .convexity import DomainClass, classify_domain, biconjugate, envelope_function
from .errors import Wedge
from .lorentz import CausalClass, causal_class, minkowski_inner
from .masolver.checks import comparison_check
from .masolver.exhaustion import exhaustion_solve
from .regions import BoundaryFunction, PlanarConvexRegion


def random_affine_max(rng, count=4, slope=0.6):
    """max of a few affine functions with small slopes, as a vectorised callable."""
    A = rng.uniform(-slope, slope, size=(count, 2))
    c = rng.uniform(-0.2, 0.2, size=count)
    return lambda x, y: np.max(A[:, 0, None] * np.ravel(x)[None] + A[:, 1, None] * np.ravel(y)[None]
                               + c[:, None], axis=0).reshape(np.shape(x))


def random_comparison_pair(rng):
    """(u_plus, u_minus, region) with MA(u_plus) <= MA(u_minus) by construction.

    u_plus = F + B(K+) with F a max of affine functions and B a hyperboloid
    or chord barrier; u_minus = u_plus + G + c + (B(K-) - B(K+)) with G
    another max of affine functions and K- < K+. The added part is convex and
    the Monge-Ampere measure is superadditive on sums of convex functions, so
    u_minus carries at least the mass of u_plus in every cell. The region is
    the disk of radius 0.85, or its part on the barrier side of the chord.
    """
    Kp = float(rng.uniform(1.0, 4.0))
    Km = float(rng.uniform(0.25, 0.9)) * Kp
    F, G = random_affine_max(rng), random_affine_max(rng)
    shift = float(rng.uniform(-0.3, 0.3))
    if rng.random() < 0.5:
        region = PlanarConvexRegion.disk(0.85)
        B = hyperboloid_values
    else:
        a = float(rng.uniform(0.0, 2 * math.pi))
        ch = Chord.from_angles(a, a + math.pi)
        m, _ = ch.normal
        p, q = np.asarray(ch.p), np.asarray(ch.q)
        side = Polygon([tuple(p), tuple(q), tuple(q + 3 * m), tuple(p + 3 * m)])
        # stay off the chord, where the barrier has unbounded slope
        region = PlanarConvexRegion.from_shapely(Point(0, 0).buffer(0.85, 256).intersection(side.buffer(-0.05)))
        B = lambda x, y, K: chord_barrier_values(x, y, K, ch)
    up = lambda x, y: F(x, y) + B(x, y, Kp)
    um = lambda x, y: F(x, y) + G(x, y) + shift + B(x, y, Km)
    return up, um, region, {"K_plus": Kp, "K_minus": Km}


def _check(name, fn):
    t = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # report, do not abort the suite
        ok, detail = False, {"error": f"{type(exc).__name__}: {exc}"}
    return {"name": name, "passed": bool(ok), "seconds": time.perf_counter() - t, "detail": detail}


def run_suite(grid: int = 65, seed: int = 0, pairs: int = 10) -> list:
    rng = np.random.default_rng(seed)
    out = []

    def lorentz():
        vals = [minkowski_inner((0, 0, 1), (0, 0, 1)), minkowski_inner((1, 0, 1), (1, 0, 1))]
        cls = [causal_class((0, 0, 2)), causal_class((3, 4, 5)), causal_class((1, 1, 0))]
        ok = vals == [-1.0, 0.0] and cls == [CausalClass.TIMELIKE_FUTURE, CausalClass.LIGHTLIKE,
                                               CausalClass.SPACELIKE]
        return ok, {"inner": vals}

    def wedge():
        phi = BoundaryFunction.from_pairs([(0, 0.0), (90, 0.0)])
        try:
            exhaustion_solve(phi, 1.0, levels=2, n=17)
        except Wedge:
            return classify_domain(phi) is DomainClass.WEDGE, {}
        return False, {"error": "wedge accepted"}

    def hyperboloid():
        sol = exhaustion_solve(BoundaryFunction.dense(0.0), 1.0, levels=6, n=grid)
        X, Y = sol.u.mesh()
        core = X * X + Y * Y <= 0.81
        err = float(np.abs(sol.u.values[core] - hyperboloid_values(X[core], Y[core])).max())
        tol = 5e-3 * (201 / grid)
        return err <= tol, {"sup_error": err, "tolerance": tol}

    def legendre():
        u = hyperboloid_support(1.0, grid)
        back = biconjugate(u)
        X, Y = u.mesh()
        m = u.finite & np.isfinite(back.values) & (X * X + Y * Y <= 0.81)
        err = float(np.abs(back.values[m] - u.values[m]).max())
        return err <= 3 * u.h, {"sup_error": err, "h": u.h}

    def comparison():
        worst = math.inf
        for _ in range(pairs):
            up, um, region, _ = random_comparison_pair(rng)
            r = comparison_check(up, um, region, n=grid)
            if r["ma_ordered"]:
                worst = min(worst, r["margin"])
        return worst >= -1e-10, {"worst_margin": worst}

    def triangle():
        phi = BoundaryFunction.from_pairs([(0, 0.0), (120, 0.0), (240, 0.0)])
        sol = exhaustion_solve(phi, 1.0, levels=6, n=grid)
        env = envelope_function(phi)
        X, Y = sol.u.mesh()
        f = sol.u.finite
        below = bool((sol.u.values[f] <= env(X[f], Y[f]) + 1e-8).all())
        return below and float(sol.u.sample(0.0, 0.0)) < 0, {"center": float(sol.u.sample(0.0, 0.0))}

    def bochner():
        from .triangular import bochner_shoot, intrinsic_curvature
        p = bochner_shoot()
        r = np.linspace(0.5, 25, 200)
        res = float(np.abs(p.residual(r)).max())
        k = float(np.abs(intrinsic_curvature(p, r / math.sqrt(2), r / math.sqrt(2)) + 1).max())
        return res <= 1e-8 and k <= 1e-4 and p.C >= 1 and 0 < p.A < 1, {"residual": res, "curvature": k}

    for name, fn in [("lorentz", lorentz), ("wedge", wedge), ("hyperboloid", hyperboloid),
                     ("legendre", legendre), ("comparison", comparison), ("triangle", triangle),
                     ("bochner", bochner)]:
        out.append(_check(name, fn))
    return out
