"""Moving-frame development of the model surface from its intrinsic data.

Two charts carry the data. The z-chart is regular at the origin:
    I  = e |dz|^2 - 2 Re(z dz^2),  e = e^{2h} + rho^2 e^{-2h},
    II = D |dz|^2,                  D = e^{2h} - rho^2 e^{-2h}.
The w-chart (w = (2/3) z^{3/2}) diagonalises both forms:
    I  = 4 sinh^2(ht) du^2 + 4 cosh^2(ht) dv^2,
    II = 2 sinh(2 ht) (du^2 + dv^2).
Coordinate-frame equations along a path p(t) with velocity v:
    sigma' = v^i X_i,   X_j' = v^i (Gamma^k_ij X_k + II_ij n),   n' = v^i B^k_i X_k.
In the w-chart the orthonormal frame e_1 = X_u/2sinh, e_2 = X_v/2cosh is used:
    de_1 = W e_2 + 2 cosh(ht) du n,   de_2 = -W e_1 + 2 sinh(ht) dv n,
    dn = 2 cosh(ht) du e_1 + 2 sinh(ht) dv e_2,   W = ht'(r) (u dv - v du)/r,
whose coefficients stay bounded where ht -> 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import StepRejected
from ..lorentz import mink
from .bochner import BochnerProfile, r_of_rho

ETA = np.diag([1.0, 1.0, -1.0])


class WChart:
    name = "w"

    def __init__(self, profile: BochnerProfile):
        self.profile = profile

    def geometry(self, p):
        u, v = p
        r = math.hypot(u, v)
        ht, dht = (float(a[0]) for a in self.profile.evaluate(np.array([r])))
        sh, ch = math.sinh(ht), math.cosh(ht)
        E, G = 4 * sh * sh, 4 * ch * ch
        dE = 4 * math.sinh(2 * ht) * dht  # d/dr of both E and G
        ur, vr = u / r, v / r
        g = np.array([[E, 0.0], [0.0, G]])
        dg = np.array([[[dE * ur, 0.0], [0.0, dE * ur]],
                       [[dE * vr, 0.0], [0.0, dE * vr]]])
        II = 2 * math.sinh(2 * ht) * np.eye(2)
        B = np.diag([ch / sh, sh / ch])
        return g, dg, II, B

    def rhs(self, p, vel, state):
        u, v = p
        r = math.hypot(u, v)
        ht, dht = (float(a[0]) for a in self.profile.evaluate(np.array([r])))
        sh2, ch2 = 2 * math.sinh(ht), 2 * math.cosh(ht)
        du, dv = vel
        W = dht * (u * dv - v * du) / r
        e1, e2, n = state[3:6], state[6:9], state[9:12]
        return np.concatenate([sh2 * du * e1 + ch2 * dv * e2,
                               W * e2 + ch2 * du * n,
                               -W * e1 + sh2 * dv * n,
                               ch2 * du * e1 + sh2 * dv * e2])

    def drift(self, p, state):
        F = np.vstack([state[3:6], state[6:9], state[9:12]])
        return float(np.max(np.abs(F @ ETA @ F.T - ETA)))

    def normalise(self, p, state):
        """Coordinate frame (X_u, X_v, n) -> orthonormal frame."""
        g = self.geometry(p)[0]
        out = state.copy()
        out[3:6] /= math.sqrt(g[0, 0])
        out[6:9] /= math.sqrt(g[1, 1])
        return out


class ZChart:
    name = "z"

    def __init__(self, profile: BochnerProfile):
        self.profile = profile

    def geometry(self, p):
        s, t = p
        rho = math.hypot(s, t)
        h, dh = (float(a[0]) for a in self.profile.h_z(np.array([max(rho, 1e-300)])))
        ep, em = math.exp(2 * h), math.exp(-2 * h)
        e = ep + rho * rho * em
        D = ep - rho * rho * em
        # de/drho divided by rho, finite at the origin since h'(rho) ~ rho e^{2h0}/2
        if rho > 1e-12:
            de_r = (2 * dh * ep + 2 * rho * em - 2 * rho * rho * dh * em) / rho
        else:
            de_r = ep * ep + 2 * em
        es, et = de_r * s, de_r * t
        P = np.array([[s, -t], [-t, -s]])
        g = e * np.eye(2) - 2 * P
        dg = np.array([[[es - 2, 0.0], [0.0, es + 2]],
                       [[et, 2.0], [2.0, et]]])
        dg[0][0][1] = dg[0][1][0] = 0.0
        dg[1][0][1] = dg[1][1][0] = 2.0
        # g_st = 2t: d_s g_st = 0, d_t g_st = 2; g_ss = e - 2s, g_tt = e + 2s
        dg[1][0][0], dg[1][1][1] = et, et
        II = D * np.eye(2)
        B = (e * np.eye(2) + 2 * P) / D
        return g, dg, II, B

    def rhs(self, p, vel, state):
        return _rhs(self, p, vel, state)

    def drift(self, p, state):
        return gram_drift(self, p, state)


def christoffel(g, dg):
    """Gamma[k, i, j] from the metric and dg[m] = d_m g."""
    gi = np.linalg.inv(g)
    # T[l, i, j] = d_i g_lj + d_j g_li - d_l g_ij
    T = np.einsum("ilj->lij", dg) + np.einsum("jli->lij", dg) - dg
    return 0.5 * np.einsum("kl,lij->kij", gi, T)


def _rhs(chart, p, vel, state):
    sigma, X, n = state[0:3], state[3:9].reshape(2, 3), state[9:12]
    g, dg, II, B = chart.geometry(p)
    Gam = christoffel(g, dg)
    dsig = vel @ X
    dX = np.einsum("i,kij,kc->jc", vel, Gam, X) + np.einsum("i,ij->j", vel, II)[:, None] * n[None, :]
    dn = np.einsum("i,ki,kc->c", vel, B, X)
    return np.concatenate([dsig, dX.ravel(), dn])


def gram_drift(chart, p, state):
    """max deviation of the normalised Gram matrix of (X_1, X_2, n) from its target."""
    g = chart.geometry(p)[0]
    F = np.vstack([state[3:6], state[6:9], state[9:12]])
    M = F @ ETA @ F.T
    T = np.zeros((3, 3))
    T[:2, :2] = g
    T[2, 2] = -1.0
    d = np.sqrt(np.abs(np.diag(T)))
    return float(np.max(np.abs((M - T) / np.outer(d, d))))


def _segment(chart, a, b, state, steps):
    vel = b - a
    dt = 1.0 / steps
    for k in range(steps):
        p = a + vel * (k * dt)
        k1 = chart.rhs(p, vel, state)
        k2 = chart.rhs(p + 0.5 * dt * vel, vel, state + 0.5 * dt * k1)
        k3 = chart.rhs(p + 0.5 * dt * vel, vel, state + 0.5 * dt * k2)
        k4 = chart.rhs(p + dt * vel, vel, state + dt * k3)
        state = state + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return state


@dataclass
class Development:
    """Developed curve: chart points, positions, frames and Gram drift.

    Frames are coordinate frames (X_1, X_2, n) for the z-chart and orthonormal
    frames (e_1, e_2, n) for the w-chart.
    """
    chart: str
    points: np.ndarray
    sigma: np.ndarray
    frames: np.ndarray
    drift: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def normals(self):
        return self.frames[:, 2, :]

    def gauss_points(self):
        n = self.normals
        return n[:, :2] / n[:, 2:3]

    def support_values(self):
        x = self.gauss_points()
        s = self.sigma
        return s[:, 0] * x[:, 0] + s[:, 1] * x[:, 1] - s[:, 2]

    @property
    def end_state(self):
        return np.concatenate([self.sigma[-1], self.frames[-1].ravel()])


def develop(chart, path, state0, step=0.01, gram_tol=1e-6, max_halvings=8):
    """Integrate the frame system along a polyline of chart points."""
    path = np.asarray(path, float)
    state = np.asarray(state0, float).copy()
    pts, sig, frm, dr = [path[0]], [state[0:3]], [state[3:].reshape(3, 3)], [chart.drift(path[0], state)]
    for a, b in zip(path[:-1], path[1:]):
        steps = max(1, int(math.ceil(np.linalg.norm(b - a) / step)))
        for _ in range(max_halvings + 1):
            new = _segment(chart, a, b, state, steps)
            d = chart.drift(b, new)
            if d <= gram_tol:
                break
            steps *= 2
        else:
            raise StepRejected(f"Gram drift {d:.3g} exceeds {gram_tol:g} near {b}")
        state = new
        pts.append(b)
        sig.append(state[0:3])
        frm.append(state[3:].reshape(3, 3))
        dr.append(d)
    return Development(chart.name, np.array(pts), np.array(sig), np.array(frm), np.array(dr))


def origin_state(profile: BochnerProfile):
    """sigma = 0, n = e_3, X_s, X_t along e_1, e_2 at the z-chart origin."""
    s = math.exp(profile.h0)
    return np.array([0, 0, 0, s, 0, 0, 0, s, 0, 0, 0, 1.0])


def z_to_w_state(z, state):
    """Re-express the frame at z in the w-chart: X_u = (a X_s - b X_t)/|.|^2, X_v = (b X_s + a X_t)/|.|^2."""
    q = np.sqrt(complex(z[0], z[1]))
    a, b = q.real, q.imag
    m = a * a + b * b
    Xs, Xt = state[3:6], state[6:9]
    out = state.copy()
    out[3:6] = (a * Xs - b * Xt) / m
    out[6:9] = (b * Xs + a * Xt) / m
    return out


def w_of_z(z):
    zz = complex(z[0], z[1])
    w = (2.0 / 3.0) * zz * np.sqrt(zz)
    return np.array([w.real, w.imag])


def z_of_w(w, angle=None):
    """Inverse of w = (2/3) z^{3/2} on the lift whose w-argument is ``angle``."""
    r = math.hypot(w[0], w[1])
    a = math.atan2(w[1], w[0]) if angle is None else angle
    rho = (1.5 * r) ** (2.0 / 3.0)
    return np.array([rho * math.cos(2 * a / 3), rho * math.sin(2 * a / 3)])


def develop_surface(profile: BochnerProfile, path, anchor: str = "origin", start_angle=None,
                    step=0.01, gram_tol=1e-6, z_switch=1.0) -> Development:
    """Develop a w-plane polyline.

    anchor="origin": the frame at the path start is transported from the
    normalised frame at z = 0 (sigma = 0, n = e_3), through the z-chart along a
    straight ray and then radially in the w-chart. anchor="start": the path
    start gets the orthonormal frame (sqrt(E) e_1, sqrt(G) e_2, e_3) at sigma = 0.
    ``start_angle`` selects the lift of the start point (w-argument, |.| < 4pi/3
    for the sector); it defaults to the principal argument.
    """
    path = np.asarray(path, float)
    w0 = path[0]
    if math.hypot(*w0) == 0:
        raise ValueError("w-chart path must avoid the origin")
    alpha = math.atan2(w0[1], w0[0]) if start_angle is None else float(start_angle)
    if abs(alpha) >= 4 * math.pi / 3:
        raise ValueError("start lies outside the sector where the w-chart is valid")
    wc = WChart(profile)
    if anchor == "start":
        st = np.array([0, 0, 0, 1.0, 0, 0, 0, 1.0, 0, 0, 0, 1.0])
        return develop(wc, path, st, step, gram_tol)
    lead = ray_state(profile, alpha, math.hypot(*w0), step=step, gram_tol=gram_tol, z_switch=z_switch)
    return develop(wc, path, lead, step, gram_tol)


def ray_state(profile, alpha, r_end, step=0.01, gram_tol=1e-6, z_switch=1.0):
    """Frame (w-chart) at radius r_end on the w-ray of argument alpha, anchored at the origin."""
    dev = develop_ray(profile, 2 * alpha / 3, [r_end], step=step, gram_tol=gram_tol, z_switch=z_switch)
    return dev.end_state


def develop_ray(profile: BochnerProfile, theta: float, radii, step=0.01, gram_tol=1e-6,
                z_switch=1.0) -> Development:
    """Develop along the z-ray of argument theta, reporting states at w-radii ``radii``.

    The z-chart is used up to rho = z_switch, then the w-ray of argument 3 theta/2.
    Returned points are w-chart points on that lift.
    """
    radii = np.sort(np.asarray(radii, float))
    zc, wc = ZChart(profile), WChart(profile)
    dirz = np.array([math.cos(theta), math.sin(theta)])
    alpha = 1.5 * theta
    dirw = np.array([math.cos(alpha), math.sin(alpha)])
    r_sw = float(r_of_rho(z_switch))
    state = origin_state(profile)
    rho_first = min(z_switch, (1.5 * radii[0]) ** (2.0 / 3.0)) if radii[0] < r_sw else z_switch
    zpath = np.array([[0.0, 0.0], rho_first * dirz])
    zstep = step / 4  # the coordinate frame is less well conditioned
    zd = develop(zc, zpath, state, zstep, gram_tol)
    state = zd.end_state
    pts, sig, frm, dr = [], [], [], []
    zpts = [p for p in radii if p < r_sw]
    # samples inside the z-chart part
    for r in zpts:
        rho = (1.5 * r) ** (2.0 / 3.0)
        if rho > rho_first:
            zd2 = develop(zc, np.array([rho_first * dirz, rho * dirz]), state, zstep, gram_tol)
            state, rho_first = zd2.end_state, rho
        w_state = wc.normalise(r * dirw, z_to_w_state(rho * dirz, state))
        pts.append(r * dirw)
        sig.append(w_state[0:3])
        frm.append(w_state[3:].reshape(3, 3))
        dr.append(zc.drift(rho * dirz, state))
    rest = [p for p in radii if p >= r_sw]
    if rest:
        if rho_first < z_switch:
            zd2 = develop(zc, np.array([rho_first * dirz, z_switch * dirz]), state, zstep, gram_tol)
            state = zd2.end_state
        wstate = wc.normalise(r_sw * dirw, z_to_w_state(z_switch * dirz, state))
        wpath = np.array([r_sw] + rest)[:, None] * dirw[None, :]
        wd = develop(wc, wpath, wstate, step, gram_tol)
        pts.extend(wd.points[1:])
        sig.extend(wd.sigma[1:])
        frm.extend(wd.frames[1:])
        dr.extend(wd.drift[1:])
    return Development("w", np.array(pts), np.array(sig), np.array(frm), np.array(dr),
                       meta={"theta": theta, "radii": radii})


def curve_speed_curvature(dev: Development, params):
    """Speed and ambient curvature of a developed curve from its sampled positions.

    ``params`` are the curve parameters of the samples (uniformly spaced);
    second-order differences give sigma' and sigma''; the curvature is the
    length of the component of sigma'' orthogonal to sigma', over |sigma'|^2.
    """
    t = np.asarray(params, float)
    S = dev.sigma
    dt = t[1] - t[0]
    d1 = (S[2:] - S[:-2]) / (2 * dt)
    d2 = (S[2:] - 2 * S[1:-1] + S[:-2]) / dt ** 2
    speed2 = mink(d1, d1)
    proj = d2 - (mink(d2, d1) / speed2)[:, None] * d1
    curv = np.sqrt(np.abs(mink(proj, proj))) / speed2
    return t[1:-1], np.sqrt(speed2), curv
