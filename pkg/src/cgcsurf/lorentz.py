"""Minkowski 3-space primitives and the isometry action on support functions."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

ETA = np.diag([1.0, 1.0, -1.0])
CAUSAL_TOL = 1e-12
MAX_BOOST = 50.0


@dataclass(frozen=True)
class MinkVector:
    x1: float
    x2: float
    x3: float

    def __post_init__(self):
        for v in (self.x1, self.x2, self.x3):
            if not math.isfinite(v):
                raise ValueError("MinkVector components must be finite")

    @classmethod
    def of(cls, v) -> "MinkVector":
        a = np.asarray(v, dtype=float).reshape(3)
        return cls(float(a[0]), float(a[1]), float(a[2]))

    def array(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3])

    def __add__(self, other):
        return MinkVector.of(self.array() + _arr(other))

    def __sub__(self, other):
        return MinkVector.of(self.array() - _arr(other))


def _arr(v) -> np.ndarray:
    return v.array() if isinstance(v, MinkVector) else np.asarray(v, dtype=float)


def mink(p, q):
    """Vectorised Minkowski product over the last axis."""
    p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    return p[..., 0] * q[..., 0] + p[..., 1] * q[..., 1] - p[..., 2] * q[..., 2]


def minkowski_inner(p, q) -> float:
    return float(mink(_arr(p), _arr(q)))


class CausalClass(enum.Enum):
    SPACELIKE = "Spacelike"
    LIGHTLIKE = "Lightlike"
    TIMELIKE_FUTURE = "TimelikeFuture"
    TIMELIKE_PAST = "TimelikePast"
    ZERO = "Zero"


def causal_class(v, tol: float = CAUSAL_TOL) -> CausalClass:
    a = _arr(v)
    if not a.any():
        return CausalClass.ZERO
    q = float(mink(a, a))
    if q > tol:
        return CausalClass.SPACELIKE
    if q >= -tol:
        return CausalClass.LIGHTLIKE
    return CausalClass.TIMELIKE_FUTURE if a[2] > 0 else CausalClass.TIMELIKE_PAST


@dataclass(frozen=True)
class AchronalPlane:
    """The plane <x, (xi, 1)> = height."""

    xi: tuple
    height: float

    def __post_init__(self):
        xi = tuple(float(c) for c in self.xi)
        if len(xi) != 2 or math.hypot(*xi) > 1 + 1e-12:
            raise ValueError("plane direction must lie in the closed unit disk")
        object.__setattr__(self, "xi", xi)


def plane_halfspace_contains(plane: AchronalPlane, p) -> bool:
    a = _arr(p)
    return a[0] * plane.xi[0] + a[1] * plane.xi[1] - a[2] <= plane.height


@dataclass(frozen=True)
class Isometry:
    linear: np.ndarray
    translation: MinkVector = MinkVector(0.0, 0.0, 0.0)

    def __post_init__(self):
        L = np.array(self.linear, dtype=float).reshape(3, 3)
        if np.abs(L.T @ ETA @ L - ETA).max() > 1e-12 * max(1.0, np.abs(L).max() ** 2):
            raise ValueError("linear part does not preserve the Minkowski form")
        if L[2, 2] <= 0:
            raise ValueError("linear part reverses time orientation")
        L.setflags(write=False)
        object.__setattr__(self, "linear", L)
        if not isinstance(self.translation, MinkVector):
            object.__setattr__(self, "translation", MinkVector.of(self.translation))

    def __call__(self, p):
        out = _arr(p) @ self.linear.T + self.translation.array()
        return MinkVector.of(out) if isinstance(p, MinkVector) else out

    def compose(self, other: "Isometry") -> "Isometry":
        """self after other."""
        return Isometry(self.linear @ other.linear, MinkVector.of(self(other.translation.array())))

    def inverse(self) -> "Isometry":
        inv = ETA @ self.linear.T @ ETA
        return Isometry(inv, MinkVector.of(-inv @ self.translation.array()))

    @classmethod
    def rotation(cls, theta: float) -> "Isometry":
        c, s = math.cos(theta), math.sin(theta)
        return cls(np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]))

    @classmethod
    def boost(cls, eps: float, axis=(1.0, 0.0)) -> "Isometry":
        """Boost of rapidity eps in the direction of a unit axis."""
        th = math.atan2(axis[1], axis[0])
        ch, sh = math.cosh(eps), math.sinh(eps)
        b = cls(np.array([[ch, 0.0, sh], [0.0, 1.0, 0.0], [sh, 0.0, ch]]))
        r = cls.rotation(th)
        return r.compose(b).compose(r.inverse())

    @classmethod
    def translation_by(cls, v) -> "Isometry":
        return cls(np.eye(3), MinkVector.of(_arr(v)))


def _unit_axis(axis):
    ax = np.asarray(axis, dtype=float).reshape(2)
    n = np.hypot(*ax)
    if not n > 0:
        raise ValueError("axis must be non-zero")
    return ax / n


def boost_points(x, y, eps, axis=(1.0, 0.0)):
    """Pull-back of disk points under the boost: returns (factor, x', y').

    The transformed support function is ``factor * u(x', y')``.
    """
    ax = _unit_axis(axis)
    c, s = ax
    xr = c * x + s * y
    yr = -s * x + c * y
    ch, sh = math.cosh(eps), math.sinh(eps)
    d = ch + xr * sh
    xb = (xr * ch + sh) / d
    yb = yr / d
    return d, c * xb - s * yb, s * xb + c * yb


def boost_support_values(u, eps, axis=(1.0, 0.0)):
    """Boost action on a support function given as a callable u(x, y)."""
    if abs(eps) > MAX_BOOST:
        raise ValueError(f"|eps| > {MAX_BOOST} rejected")

    def transformed(x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        d, xb, yb = boost_points(x, y, eps, axis)
        val = np.asarray(u(xb, yb), dtype=float)
        fin = np.isfinite(val)
        return np.where(fin, d * np.where(fin, val, 0.0), np.inf)

    return transformed


def boost_support_action(u, eps: float, axis=(1.0, 0.0)):
    """Boost action on a sampled DiskField via bilinear interpolation."""
    from .fields import DiskField

    if abs(eps) > MAX_BOOST:
        raise ValueError(f"|eps| > {MAX_BOOST} rejected")
    X, Y = u.mesh()
    vals = boost_support_values(u.sample, eps, axis)(X, Y)
    return DiskField(vals, meta=dict(u.meta, boost=float(eps)))
