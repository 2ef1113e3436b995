"""Explicit comparison surfaces: hyperboloids, chord barriers, revolution surfaces, trough."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .fields import DiskField, SurfaceMesh, grid_axis

__all__ = [
    "hyperboloid_values", "hyperboloid_support", "hyperboloid_mesh",
    "canonical_chord_barrier", "Chord", "chord_barrier_values", "chord_barrier",
    "RevolutionProfile", "revolution_F", "revolution_surface",
    "trough_values", "trough_support", "trough_mesh", "graph_curvature",
]


def _check_K(K):
    if not K > 0 or not math.isfinite(K):
        raise ValueError("curvature K must be positive")


def _lam(x, y):
    return np.sqrt(np.maximum(0.0, 1.0 - x * x - y * y))


def _in_disk(x, y):
    return x * x + y * y <= 1.0 + 1e-12


# hyperboloid -----------------------------------------------------------------

def hyperboloid_values(x, y, K=1.0):
    _check_K(K)
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    return np.where(_in_disk(x, y), -_lam(x, y) / math.sqrt(K), np.inf)


def hyperboloid_support(K: float = 1.0, n: int = 129) -> DiskField:
    _check_K(K)
    return DiskField.from_function(lambda x, y: hyperboloid_values(x, y, K), n,
                                   closed_convex=True, meta={"K": K, "barrier": "hyperboloid"})


def graph_curvature(f, h):
    """det D2f / (1 - |Df|^2)^2 by central differences (one-sided at the border)."""
    fx, fy = np.gradient(f, h)
    fxx, fxy = np.gradient(fx, h)
    fyx, fyy = np.gradient(fy, h)
    return (fxx * fyy - (0.5 * (fxy + fyx)) ** 2) / (1 - fx * fx - fy * fy) ** 2


def _graph_mesh(f, R, meta):
    h = 2 * R / (f.shape[0] - 1)
    fx, fy = np.gradient(f, h)
    w = np.sqrt(np.maximum(1e-300, 1 - fx * fx - fy * fy))
    normals = np.stack([fx / w, fy / w, 1 / w], axis=-1)
    mesh = SurfaceMesh(f, R, normals=normals, curvature=graph_curvature(f, h), meta=meta)
    mesh.gauss = np.stack([fx, fy], axis=-1)
    return mesh


def hyperboloid_mesh(K: float = 1.0, R: float = 2.0, n: int = 65) -> SurfaceMesh:
    _check_K(K)
    a = grid_axis(n, R)
    X, Y = np.meshgrid(a, a, indexing="ij")
    f = np.sqrt(1.0 / K + X * X + Y * Y)
    return _graph_mesh(f, R, {"K": K, "surface": "hyperboloid"})


# chord barrier -----------------------------------------------------------------

def canonical_chord_barrier(x, y, K=1.0):
    """Barrier over the half-disk {x > 0}, vanishing on its boundary."""
    _check_K(K)
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    ok = (x >= 0) & _in_disk(x, y)
    w = np.maximum(1.0 - y * y, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(ok & (w > 0), np.minimum(x * x / np.where(w > 0, w, 1.0), 1.0), 1.0)
        s = np.sqrt(1.0 - q)
        one_minus_s = q / (1.0 + s)
        logterm = np.log1p(s) - np.log(np.where(one_minus_s > 0, one_minus_s, 1.0))
        val = np.where((x > 0) & (one_minus_s > 0), -0.5 / math.sqrt(K) * x * logterm, 0.0)
    return np.where(ok, val, np.inf)


@dataclass(frozen=True)
class Chord:
    """Oriented chord from p to q; the barrier lives on its left side."""

    p: tuple
    q: tuple

    def __post_init__(self):
        p = tuple(float(c) for c in self.p)
        q = tuple(float(c) for c in self.q)
        if math.dist(p, q) < 1e-9:
            raise ValueError("degenerate chord")
        for pt in (p, q):
            if abs(math.hypot(*pt) - 1) > 1e-9:
                raise ValueError("chord endpoints must lie on the unit circle")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @classmethod
    def from_angles(cls, a, b):
        return cls((math.cos(a), math.sin(a)), (math.cos(b), math.sin(b)))

    @property
    def normal(self):
        """Inward unit normal m and offset c: the half-disk is {m.x >= c}."""
        d = np.subtract(self.q, self.p)
        m = np.array([-d[1], d[0]]) / math.hypot(*d)
        return m, float(m @ np.asarray(self.p))

    @property
    def rapidity(self):
        return math.atanh(-self.normal[1])


def chord_barrier_values(x, y, K, chord: Chord):
    """Canonical barrier rotated so its normal is m, then boosted onto the chord."""
    m, _ = chord.normal
    eps = chord.rapidity
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    xr = m[0] * x + m[1] * y
    yr = -m[1] * x + m[0] * y
    ch, sh = math.cosh(eps), math.sinh(eps)
    d = ch + xr * sh
    with np.errstate(divide="ignore", invalid="ignore"):
        xb = (xr * ch + sh) / d
        yb = yr / d
    xb = np.where((xb < 0) & (xb > -1e-12), 0.0, xb)  # nodes on the chord itself
    base = canonical_chord_barrier(np.clip(xb, -2, 2), np.clip(yb, -2, 2), K)
    fin = np.isfinite(base) & _in_disk(x, y) & (d > 0)
    return np.where(fin, d * np.where(fin, base, 0.0), np.inf)


def chord_barrier(K: float, chord: Chord, n: int = 129) -> DiskField:
    _check_K(K)
    return DiskField.from_function(lambda x, y: chord_barrier_values(x, y, K, chord), n,
                                   closed_convex=True,
                                   meta={"K": K, "barrier": "chord", "chord": [chord.p, chord.q]})


# revolution surfaces -------------------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)
_T_MAX = 50.0
_DT = 1.0 / 128


def _gprime(t, a):
    return np.sqrt(1.0 + (a * np.sinh(t)) ** 2)


def _tail_integrand(t, a):
    """g'(t) - r'(t) written without cancellation."""
    return 1.0 / (_gprime(t, a) + a * np.sinh(t))


def _cumulative(fun, t):
    """Cumulative integral of fun on the breakpoints t by 10-point Gauss-Legendre."""
    lo, hi = t[:-1], t[1:]
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    nodes = mid[:, None] + half[:, None] * _GL_X[None, :]
    pieces = (fun(nodes) * _GL_W[None, :]).sum(axis=1) * half
    return np.concatenate([[0.0], np.cumsum(pieces)])


def revolution_F(a: float) -> float:
    """F(a) = lim (g - r) = int_0^inf (g' - r') dt - a."""
    if not 0 < a <= 1:
        raise ValueError("a must lie in (0, 1]")
    t = np.arange(0.0, _T_MAX + _DT / 2, _DT)
    body = _cumulative(lambda s: _tail_integrand(s, a), t)[-1]
    # beyond T_MAX the integrand is below exp(-T_MAX)/a; integrate its leading term
    return float(body + math.exp(-_T_MAX) / (2 * a) - a)


@dataclass
class RevolutionProfile:
    a: float
    K: float
    F_of_a: float
    t: np.ndarray
    g: np.ndarray
    r: np.ndarray

    @property
    def dg(self):
        return _gprime(self.t, self.a)

    @property
    def dr(self):
        return self.a * np.sinh(self.t)

    def arclength_defect(self):
        # g'^2 - r'^2 - 1 factored as (g' - r')(g' + r') - 1 to avoid cancellation
        return float(np.abs(_tail_integrand(self.t, self.a) * (self.dg + self.dr) - 1).max())

    def g_inverse(self, s):
        """t with g(t) = s (g is odd)."""
        s = np.asarray(s, float)
        spline = CubicHermiteSpline(self.g, self.t, 1.0 / self.dg)
        t = spline(np.abs(s))
        gs = CubicHermiteSpline(self.t, self.g, self.dg)
        for _ in range(2):
            t = t - (gs(t) - np.abs(s)) / _gprime(t, self.a)
        return np.sign(s) * t

    def tail(self, t):
        """int_t^inf (g' - r')."""
        c = _cumulative(lambda s: _tail_integrand(s, self.a), self.t)
        total = c[-1] + math.exp(-self.t[-1]) / (2 * self.a)
        spline = CubicHermiteSpline(self.t, c, _tail_integrand(self.t, self.a))
        t = np.asarray(t, float)
        inside = t <= self.t[-1]
        return np.where(inside, total - spline(np.minimum(t, self.t[-1])),
                        np.exp(-t) / (2 * self.a))

    def support_on_axis(self, xh):
        """u(xh, 0) for |xh| <= 1."""
        xh = np.abs(np.asarray(xh, float))
        out = np.full(xh.shape, self.F_of_a)
        inner = xh < 1
        x = xh[inner]
        one_m = 1 - x * x
        ts = np.arcsinh(x / (self.a * np.sqrt(one_m)))
        r = np.sqrt(self.a ** 2 * one_m + x * x) / np.sqrt(one_m)
        # x g - r = x (g - r) - (1 - x) r, and g - r = F - tail
        out[inner] = x * (self.F_of_a - self.tail(ts)) - np.sqrt(1 - x) * np.sqrt(
            self.a ** 2 * one_m + x * x) / np.sqrt(1 + x)
        del r
        return out / math.sqrt(self.K)

    def support_values(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        ok = _in_disk(x, y)
        w = np.sqrt(np.maximum(0.0, 1 - y * y))
        xh = np.where(ok & (w > 0), np.clip(x / np.where(w > 0, w, 1.0), -1, 1), 0.0)
        val = w * self.support_on_axis(xh)
        return np.where(ok, val, np.inf)


def revolution_profile(a: float, K: float = 1.0) -> RevolutionProfile:
    if not 0 < a <= 1:
        raise ValueError("a must lie in (0, 1]")
    _check_K(K)
    t = np.arange(0.0, _T_MAX + _DT / 2, _DT)
    g = _cumulative(lambda s: _gprime(s, a), t)
    return RevolutionProfile(a, K, revolution_F(a), t, g, a * np.cosh(t))


def revolution_surface(a: float, K: float = 1.0, R: float = 2.0, n_mesh: int = 65,
                       n_field: int = 129):
    """Profile, graph mesh over [-R, R]^2 and support field of the scaled surface."""
    prof = revolution_profile(a, K)
    ax = grid_axis(n_mesh, R)
    X1, X2 = np.meshgrid(ax, ax, indexing="ij")
    t = prof.g_inverse(X1 * math.sqrt(K))
    f = np.sqrt((a * np.cosh(t)) ** 2 + K * X2 * X2) / math.sqrt(K)
    mesh = _graph_mesh(f, R, {"K": K, "a": a, "surface": "revolution"})
    field = DiskField.from_function(prof.support_values, n_field, closed_convex=True,
                                    meta={"K": K, "a": a, "barrier": "revolution"})
    return prof, mesh, field


# trough ------------------------------------------------------------------------

def trough_values(x, y):
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    on = (np.abs(x) <= 1e-12) & (np.abs(y) <= 1 + 1e-12)
    return np.where(on, -np.sqrt(np.maximum(0.0, 1 - y * y)), np.inf)


def trough_support(n: int = 129) -> DiskField:
    return DiskField.from_function(trough_values, n, closed_convex=True, meta={"barrier": "trough"})


def trough_mesh(R: float = 2.0, n: int = 65) -> SurfaceMesh:
    """x3 = sqrt(1 + x2^2): a hyperbola translated along x1."""
    ax = grid_axis(n, R)
    X1, X2 = np.meshgrid(ax, ax, indexing="ij")
    return _graph_mesh(np.sqrt(1 + X2 * X2), R, {"surface": "trough"})
