"""Radial sinh-Gordon profile by shooting on the regular z-chart equation.

z-chart:  h'' + h'/rho = e^{2h} - rho^2 e^{-2h},  h'(0) = 0.
w-chart:  r = (2/3) rho^{3/2},  ht(r) = h(rho) - (1/2) log rho,  ht'' + ht'/r = 2 sinh 2ht.

Far from the origin the w-chart solution decays like c K0(2r); the near field
from the shoot is blended into that tail where the two bracket trajectories
still agree.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import k0e, k1e

from ..errors import BisectionExhausted

RHO_START = 1e-3
RHO_IMPLICIT = 1.0
RHO_SHOOT = 12.0


def _rhs(rho, y):
    h, dh = y
    return [dh, math.exp(2 * h) - rho * rho * math.exp(-2 * h) - dh / rho]


def _jac(rho, y):
    h, _ = y
    return [[0.0, 1.0], [2 * math.exp(2 * h) + 2 * rho * rho * math.exp(-2 * h), -1.0 / rho]]


def _series(h0, rho):
    e = math.exp(2 * h0)
    c2 = e / 4
    c4 = (2 * e * c2 - 1 / e) / 16
    return h0 + c2 * rho ** 2 + c4 * rho ** 4, 2 * c2 * rho + 4 * c4 * rho ** 3


def _under(rho, y):
    return y[0] - 0.5 * math.log(rho)


_under.terminal = True
_under.direction = -1


def _over(rho, y):
    return y[1] - 0.5 / rho


_over.terminal = True
_over.direction = 1


def shoot(h0, rho_max=RHO_SHOOT):
    """Integrate from the origin; returns (+1 overshoot | -1 undershoot | 0, segments)."""
    y0 = list(_series(h0, RHO_START))
    segs = []
    s1 = solve_ivp(_rhs, [RHO_START, RHO_IMPLICIT], y0, method="Radau", jac=_jac,
                   rtol=1e-12, atol=1e-14, events=[_over, _under], dense_output=True)
    segs.append(s1)
    status = _classify(s1)
    if status is None:
        s2 = solve_ivp(_rhs, [RHO_IMPLICIT, rho_max], s1.y[:, -1], method="DOP853",
                       rtol=1e-13, atol=1e-15, events=[_over, _under], dense_output=True)
        segs.append(s2)
        status = _classify(s2)
    return (0 if status is None else status), segs


def _classify(s):
    if s.status == -1 or s.t_events[0].size:
        return 1
    if s.t_events[1].size:
        return -1
    return None


def _eval(segs, rho):
    """h, h' on the z-chart from ODE segments (rho within range)."""
    rho = np.atleast_1d(np.asarray(rho, float))
    out = np.empty((2, rho.size))
    first = segs[0]
    for k, r in enumerate(rho):
        for s in segs:
            if r <= s.t[-1] + 1e-15:
                out[:, k] = s.sol(max(r, s.t[0]))
                break
        else:
            raise ValueError("rho beyond the integrated range")
    del first
    return out


def rho_of_r(r):
    return (1.5 * np.asarray(r, float)) ** (2.0 / 3.0)


def r_of_rho(rho):
    return (2.0 / 3.0) * np.asarray(rho, float) ** 1.5


def _k0(x):
    return k0e(x) * np.exp(-x)


def _k1(x):
    return k1e(x) * np.exp(-x)


@dataclass
class BochnerProfile:
    h0: float
    segments: list = field(repr=False)
    r_match: float = 0.0
    r_blend: float = 0.0
    c_tail: float = 0.0
    r_max: float = 30.0
    bracket: tuple = ()
    iterations: int = 0
    A: float = float("nan")
    C: float = float("nan")
    r0: float = float("nan")
    rho_top: float = 0.0

    # near field, w-chart
    def _near(self, r):
        rho = rho_of_r(r)
        small = rho < RHO_START
        h = np.empty(rho.shape)
        dh = np.empty(rho.shape)
        if small.any():
            hs, dhs = _series(self.h0, rho[small])
            h[small], dh[small] = hs, dhs
        if (~small).any():
            v = _eval(self.segments, rho[~small])
            h[~small], dh[~small] = v[0], v[1]
        ht = h - 0.5 * np.log(rho)
        dht = (dh - 0.5 / rho) / np.sqrt(rho)
        return ht, dht

    def _tail(self, r):
        return self.c_tail * _k0(2 * r), -2 * self.c_tail * _k1(2 * r)

    @staticmethod
    def _weight(r, a, b):
        """C^2 step from 0 at a to 1 at b, with its first two derivatives."""
        s = np.clip((r - a) / (b - a), 0.0, 1.0)
        w = s ** 3 * (10 - 15 * s + 6 * s * s)
        dw = 30 * s * s * (1 - s) ** 2 / (b - a)
        return w, dw

    def evaluate(self, r):
        """ht(r), ht'(r) for r > 0."""
        r = np.atleast_1d(np.asarray(r, float))
        ht = np.empty(r.shape)
        dht = np.empty(r.shape)
        near = r <= self.r_blend
        far = r >= self.r_match
        mid = ~near & ~far
        if near.any():
            ht[near], dht[near] = self._near(r[near])
        if far.any():
            ht[far], dht[far] = self._tail(r[far])
        if mid.any():
            a, da = self._near(r[mid])
            b, db = self._tail(r[mid])
            w, dw = self._weight(r[mid], self.r_blend, self.r_match)
            ht[mid] = (1 - w) * a + w * b
            dht[mid] = (1 - w) * da + w * db + dw * (b - a)
        return ht, dht

    def h(self, r):
        return self.evaluate(r)[0]

    def dh(self, r):
        return self.evaluate(r)[1]

    def h_z(self, rho):
        """z-chart h(rho) and h'(rho)."""
        rho = np.atleast_1d(np.asarray(rho, float))
        ht, dht = self.evaluate(r_of_rho(np.maximum(rho, RHO_START)))
        hz = ht + 0.5 * np.log(rho)
        dhz = dht * np.sqrt(rho) + 0.5 / rho
        small = rho < RHO_START
        if small.any():
            hz[small], dhz[small] = _series(self.h0, rho[small])
        return hz, dhz

    def residual(self, r, delta=1e-3):
        """ht'' + ht'/r - 2 sinh 2ht with ht'' by 5-point differences of ht'."""
        r = np.asarray(r, float)
        ht, dht = self.evaluate(r)
        f = [self.dh(r + k * delta) for k in (-2, -1, 1, 2)]
        d2 = (f[0] - 8 * f[1] + 8 * f[2] - f[3]) / (12 * delta)
        return d2 + dht / r - 2 * np.sinh(2 * ht)

    def samples(self, count=2000, r_min=0.05):
        r = np.linspace(r_min, self.r_max, count)
        return r, self.h(r)

    def embedding_data(self, r) -> "EmbeddingData":
        r = np.atleast_1d(np.asarray(r, float))
        ht = self.h(r)
        return EmbeddingData(r, (2 * np.sinh(ht)) ** 2, (2 * np.cosh(ht)) ** 2, 1 / np.tanh(ht), np.tanh(ht))

    def to_csv(self, path, count=2000):
        r, ht = self.samples(count)
        np.savetxt(path, np.column_stack([r, ht, self.dh(r)]), delimiter=",",
                   header="r,ht,dht", comments="", fmt="%.17g")


@dataclass(frozen=True)
class EmbeddingData:
    """Diagonal first fundamental form E du^2 + G dv^2 and shape operator diag(b1, b2)."""
    r: np.ndarray
    E: np.ndarray
    G: np.ndarray
    b1: np.ndarray
    b2: np.ndarray

    @property
    def det_B(self):
        return self.b1 * self.b2

    @property
    def EG(self):
        return self.E * self.G


@functools.lru_cache(maxsize=8)
def bochner_shoot(r_max: float = 30.0, tol: float = 1e-3, bracket=(-2.0, 2.0),
                  max_iter: int = 200, agree: float = 1e-9) -> BochnerProfile:
    """Bisect on h(0) between overshoot and undershoot, then attach the K0 tail.

    The near field is trusted up to the radius where the final bracket
    trajectories agree to ``agree`` relative to ht; the tail coefficient is
    fitted there. ``tol`` bounds |ht| at the matching radius (the size of the
    neglected nonlinearity is tol^3).
    """
    if r_max < 20:
        raise ValueError("r_max must be at least 20")
    lo, hi = map(float, bracket)
    slo, _ = shoot(lo)
    shi, _ = shoot(hi)
    if slo != -1 or shi != 1:
        raise BisectionExhausted("bracket does not separate undershoot from overshoot",
                                 bracket=(lo, hi), iterations=0)
    it = 0
    for it in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        s, _ = shoot(mid)
        if s == 1:
            hi = mid
        elif s == -1:
            lo = mid
        else:
            lo = hi = mid
            break
    else:
        raise BisectionExhausted("bisection did not reach machine resolution",
                                 bracket=(lo, hi), iterations=it)
    _, seg_lo = shoot(lo)
    _, seg_hi = shoot(hi)
    top = min(seg_lo[-1].t[-1], seg_hi[-1].t[-1])
    rho = np.linspace(RHO_IMPLICIT, top, 4000)
    a = _eval(seg_lo, rho)[0] - 0.5 * np.log(rho)
    b = _eval(seg_hi, rho)[0] - 0.5 * np.log(rho)
    mid_h = 0.5 * (a + b)
    good = np.abs(a - b) <= agree * np.abs(mid_h)
    bad = np.flatnonzero(~good)
    k = (bad[0] - 1) if bad.size else rho.size - 1
    if k < 1:
        raise BisectionExhausted("bracket trajectories never agree", bracket=(lo, hi), iterations=it)
    rho_m = rho[k]
    r_m = float(r_of_rho(rho_m))
    hm = float(mid_h[k])
    if not (0 < hm < tol):
        raise BisectionExhausted(f"profile has not entered the linear regime (ht={hm:.3g} at r={r_m:.3g})",
                                 bracket=(lo, hi), iterations=it)
    decade = (rho >= rho_m / 10) & (rho <= rho_m)
    if not (np.diff(mid_h[decade]) < 0).all():
        raise BisectionExhausted("profile not decreasing over the last decade", bracket=(lo, hi),
                                 iterations=it)
    c = hm / float(_k0(2 * r_m))
    prof = BochnerProfile(h0=0.5 * (lo + hi), segments=seg_lo, r_match=r_m,
                          r_blend=max(r_m - 1.0, 0.5 * r_m), c_tail=c, r_max=float(r_max),
                          bracket=(lo, hi), iterations=it, rho_top=float(rho_m))
    prof.A, prof.C, prof.r0 = fit_bounds(prof)
    return prof


def fit_bounds(prof: BochnerProfile, r0_candidates=None):
    """Smallest r0 <= 5 with ht > 0 decreasing, ht <= e^{-Cr}, ht >= A r^{-1/2} e^{-2r} on [r0, r_max]."""
    r0_candidates = r0_candidates if r0_candidates is not None else np.arange(0.25, 5.0001, 0.25)
    r = np.linspace(min(r0_candidates), prof.r_max, 6000)
    ht = prof.h(r)
    for r0 in r0_candidates:
        m = r >= r0
        hm, rm = ht[m], r[m]
        if not ((hm > 0).all() and (np.diff(hm) < 0).all()):
            continue
        C = float(np.min(-np.log(hm) / rm))
        A = float(np.min(hm * np.sqrt(rm) * np.exp(2 * rm)))
        if C >= 1 and 0 < A < 1:
            return A, C, float(r0)
    return float("nan"), float("nan"), float("nan")


def intrinsic_curvature(prof: BochnerProfile, u, v, delta=1e-3):
    """Curvature of 4 sinh^2(ht) du^2 + 4 cosh^2(ht) dv^2 by 5-point differences.

    With E = e^{2a}, G = e^{2b}:  K = -e^{-a-b} [ (e^{b-a} b_u)_u + (e^{a-b} a_v)_v ].
    b is carried as log cosh(ht) through log1p so its tiny variation survives
    where ht is small.
    """
    u, v = np.asarray(u, float), np.asarray(v, float)

    def ht(uu, vv):
        return prof.h(np.hypot(uu, vv).ravel()).reshape(np.shape(uu))

    def a(uu, vv):
        return np.log(np.sinh(ht(uu, vv)))

    def b(uu, vv):
        return np.log1p(2 * np.sinh(ht(uu, vv) / 2) ** 2)

    def d1(fun, uu, vv, axis):
        du, dv = (delta, 0.0) if axis == 0 else (0.0, delta)
        f = [fun(uu + k * du, vv + k * dv) for k in (-2, -1, 1, 2)]
        return (f[0] - 8 * f[1] + 8 * f[2] - f[3]) / (12 * delta)

    def flux_u(uu, vv):
        return d1(b, uu, vv, 0) / np.tanh(ht(uu, vv))

    def flux_v(uu, vv):
        return d1(a, uu, vv, 1) * np.tanh(ht(uu, vv))

    x = ht(u, v)
    return -(d1(flux_u, u, v, 0) + d1(flux_v, u, v, 1)) / (2 * np.sinh(2 * x))
