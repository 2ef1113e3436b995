"""Properness of the developed axis and the normal-evolution metric identity."""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from ..lorentz import mink
from .bochner import BochnerProfile
from .develop import develop_surface

EPS0 = 1e-8  # below this radius the leading singular term is integrated exactly


def _axis_grid(U, count):
    near = np.geomspace(EPS0, 1.0, count // 4)
    far = np.linspace(1.0, U, count)[1:]
    return np.concatenate([near, far]) if U > 1 else np.geomspace(EPS0, U, count)


def _singular_head(profile):
    # 2 sinh ht ~ 2 cosh ht ~ e^{h0} (3r/2)^{-1/3} near 0; its integral over [0, EPS0]
    return math.exp(profile.h0) * (1.5) ** (-1.0 / 3.0) * 1.5 * EPS0 ** (2.0 / 3.0)


def divergence_integral(profile: BochnerProfile, U, count: int = 20000):
    """u-grid, I(u) = int_0^u exp(int_0^s kappa nu) nu ds and the inner integral.

    kappa nu = 2 cosh ht is the curvature times speed of the axis curve and
    nu = 2 sinh ht its speed.
    """
    u = _axis_grid(float(U), count)
    ht = profile.h(u)
    head = _singular_head(profile)
    inner = head + cumulative_trapezoid(2 * np.cosh(ht), u, initial=0.0)
    f = np.exp(inner) * 2 * np.sinh(ht)
    outer = head + cumulative_trapezoid(f, u, initial=0.0)
    return u, outer, inner


def axis_properness_report(profile: BochnerProfile, r_max: float | None = None, checkpoints=None,
                           develop_to: float = 3.0, v_span=(0.5, 3.0)) -> dict:
    """Growth of the divergence integral, its lower bound, and the developed lightlike coordinate."""
    U = float(profile.r_max if r_max is None else r_max)
    u, I, inner = divergence_integral(profile, U)
    checkpoints = np.asarray(checkpoints if checkpoints is not None else [1, 2, 5, 10, 15, 20, 25, 30], float)
    checkpoints = checkpoints[checkpoints <= U]
    vals = np.interp(checkpoints, u, I)
    r0, A = profile.r0, profile.A
    bound = [2 * A * (math.sqrt(c) - math.sqrt(r0)) for c in checkpoints] if math.isfinite(A) else []
    ivals = np.interp(checkpoints, u, I)
    i_r0 = float(np.interp(r0, u, I)) if math.isfinite(r0) else float("nan")

    # lightlike coordinate of the developed axis: xi = T - n at the start
    s = np.linspace(0.05, develop_to, 300)
    dev = develop_surface(profile, np.column_stack([s, np.zeros_like(s)]), gram_tol=1.0)
    T0, n0 = dev.frames[0, 0], dev.frames[0, 2]
    xi = T0 - n0
    rho = mink(dev.sigma - dev.sigma[0], np.broadcast_to(xi, dev.sigma.shape))
    # d rho/du = nu exp(int_{s0}^u kappa nu): the integrand renormalised at s0
    ref = (np.interp(s, u, I) - float(np.interp(s[0], u, I))) / math.exp(float(np.interp(s[0], u, inner)))
    dI = np.diff(ref)
    rel = np.abs(rho - ref)[1:] / np.maximum(np.abs(ref[1:]), 1e-300)

    # the v-axis (image of the negative real z-axis): length >= 2 dv
    va, vb = v_span
    v = np.linspace(va, vb, 2000)
    length = float(trapezoid(2 * np.cosh(profile.h(v)), v))
    return {
        "r_max": U,
        "checkpoints": checkpoints.tolist(),
        "integral": vals.tolist(),
        "increasing": bool(np.all(np.diff(I) > 0)),
        "final": float(I[-1]),
        "lower_bound": bound,
        "bound_holds": bool(bound) and all(iv - i_r0 >= b - 1e-12 for iv, b in zip(ivals, bound)),
        "lightlike_increasing": bool(np.all(np.diff(rho) > 0)),
        "lightlike_vs_integral": float(rel.max()),
        "lightlike_drift": float(dev.drift.max()),
        "quadrature_increments_positive": bool(np.all(dI > 0)),
        "negative_axis_length": length,
        "negative_axis_dv": float(vb - va),
        "negative_axis_complete": bool(length >= 2 * (vb - va)),
    }


def normal_evolution_check(profile: BochnerProfile, path, spacing: float = 2e-3, step: float = 5e-4) -> dict:
    """Compare the pulled-back metric of sigma_1 = sigma_0 + n with 4 e^{2 ht} |dw|^2.

    The path is resampled at ``spacing``; the metric density is estimated from
    Minkowski chord lengths of consecutive sigma_1 samples.
    """
    path = np.asarray(path, float)
    pts = [path[0]]
    for a, b in zip(path[:-1], path[1:]):
        k = max(1, int(math.ceil(np.linalg.norm(b - a) / spacing)))
        pts.extend(a + (b - a) * t for t in np.linspace(0, 1, k + 1)[1:])
    pts = np.array(pts)
    dev = develop_surface(profile, pts, step=step, gram_tol=1.0)
    s1 = dev.sigma + dev.normals
    d = np.diff(s1, axis=0)
    dw2 = np.sum(np.diff(pts, axis=0) ** 2, axis=1)
    measured = mink(d, d) / dw2
    mid = 0.5 * (pts[1:] + pts[:-1])
    ht = profile.h(np.hypot(mid[:, 0], mid[:, 1]))
    expected = 4 * np.exp(2 * ht)
    rel = np.abs(measured / expected - 1)
    return {
        "samples": int(rel.size),
        "max_relative": float(rel.max()),
        "density_end": float(measured[-1]),
        "drift": float(dev.drift.max()),
        "passed": bool(rel.max() <= 1e-5),
    }
