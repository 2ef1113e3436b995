"""Boundary data on the circle and convex planar regions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import shapely
from scipy.optimize import linprog

from . import extended

TWO_PI = 2.0 * math.pi


class BoundaryFunction:
    """phi on the unit circle, finite on a node set and +inf elsewhere."""

    __slots__ = ("angles", "values")

    def __init__(self, angles, values):
        th = np.asarray(angles, dtype=float).ravel()
        vals = np.array([extended.parse(v) for v in np.asarray(values, dtype=object).ravel()])
        if th.shape != vals.shape:
            raise ValueError("angles and values differ in length")
        if ((th < 0) | (th >= TWO_PI)).any():
            raise ValueError("node angles must lie in [0, 2*pi)")
        if th.size > 1 and not (np.diff(th) > 0).all():
            raise ValueError("node angles must be strictly increasing")
        th.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "angles", th)
        object.__setattr__(self, "values", vals)

    def __setattr__(self, *_):
        raise AttributeError("BoundaryFunction is immutable")

    @classmethod
    def from_pairs(cls, pairs, degrees=True):
        """Build from [[theta, value|'inf'], ...], sorting by angle."""
        items = []
        for th, v in pairs:
            t = math.radians(float(th)) if degrees else float(th)
            items.append((math.fmod(t, TWO_PI) % TWO_PI, extended.parse(v)))
        items.sort(key=lambda p: p[0])
        return cls([p[0] for p in items], [p[1] for p in items])

    @classmethod
    def dense(cls, value=0.0, count=360):
        return cls(np.arange(count) * (TWO_PI / count), [value] * count)

    def __len__(self):
        return self.angles.size

    @property
    def finite(self):
        return np.isfinite(self.values)

    def finite_points(self):
        th = self.angles[self.finite]
        return np.column_stack([np.cos(th), np.sin(th)])

    def finite_values(self):
        return self.values[self.finite].copy()

    def pairs_degrees(self):
        return [[math.degrees(t), extended.to_json(v)] for t, v in zip(self.angles, self.values)]

    def __repr__(self):
        return f"BoundaryFunction({len(self)} nodes, {int(self.finite.sum())} finite)"


@dataclass(frozen=True)
class Arc:
    """Circular arc edge, traversed counter-clockwise about its center."""

    center: tuple = (0.0, 0.0)
    radius: float = 1.0


@dataclass(frozen=True)
class PlanarConvexRegion:
    """Convex region bounded by chords and counter-clockwise circular arcs.

    ``flag`` is one of 'full', 'segment', 'point', 'empty' so degenerate hulls
    can still be described.
    """

    vertices: np.ndarray
    edges: tuple = ()
    flag: str = "full"
    _poly: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float).reshape(-1, 2)
        if (np.hypot(v[:, 0], v[:, 1]) > 1 + 1e-9).any():
            raise ValueError("region vertices must lie in the closed unit disk")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        edges = tuple(self.edges) if self.edges else ("chord",) * len(v)
        if len(edges) != len(v):
            raise ValueError("one edge kind per vertex is required")
        object.__setattr__(self, "edges", edges)
        if self.flag == "full":
            if len(v) < 3 or not _is_convex_ccw(v):
                if len(v) >= 3 and _is_convex_ccw(v[::-1]):
                    raise ValueError("vertices must be listed counter-clockwise")
                raise ValueError("vertex polygon is not convex")

    @classmethod
    def polygon(cls, vertices):
        return cls(np.asarray(vertices, dtype=float))

    @classmethod
    def from_shapely(cls, poly):
        poly = shapely.geometry.polygon.orient(poly, 1.0)
        xy = np.asarray(poly.exterior.coords)[:-1]
        return cls(_drop_collinear(xy))

    @classmethod
    def disk(cls, radius, count=720):
        th = np.arange(count) * (TWO_PI / count)
        return cls(radius * np.column_stack([np.cos(th), np.sin(th)]))

    # geometry -------------------------------------------------------------
    def boundary_points(self, arc_step=0.01):
        """Closed counter-clockwise polyline approximating the boundary."""
        pts = []
        k = len(self.vertices)
        for i in range(k):
            p, q = self.vertices[i], self.vertices[(i + 1) % k]
            e = self.edges[i]
            if isinstance(e, Arc):
                c = np.asarray(e.center)
                a0 = math.atan2(*(p - c)[::-1])
                a1 = math.atan2(*(q - c)[::-1])
                while a1 <= a0:
                    a1 += TWO_PI
                m = max(2, int(math.ceil((a1 - a0) * e.radius / arc_step)))
                t = np.linspace(a0, a1, m, endpoint=False)
                pts.append(c + e.radius * np.column_stack([np.cos(t), np.sin(t)]))
            else:
                pts.append(p[None, :])
        return np.vstack(pts)

    @property
    def shape(self):
        if self._poly is None:
            if self.flag == "full":
                g = shapely.Polygon(self.boundary_points())
            elif self.flag == "segment":
                g = shapely.LineString(self.vertices[:2])
            elif self.flag == "point":
                g = shapely.Point(self.vertices[0])
            else:
                g = shapely.Polygon()
            object.__setattr__(self, "_poly", g)
        return self._poly

    def halfplanes(self):
        """Outward normals n and offsets b with region = {n.x <= b}."""
        pts = self.boundary_points()
        d = np.roll(pts, -1, axis=0) - pts
        n = np.column_stack([d[:, 1], -d[:, 0]])
        n /= np.hypot(n[:, 0], n[:, 1])[:, None]
        return n, (n * pts).sum(axis=1)

    def contains(self, x, y, closed=False, tol=1e-12):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        if self.flag != "full":
            if self.flag == "empty":
                return np.zeros(np.broadcast(x, y).shape, bool)
            return _on_segment(self.vertices, x, y, tol) if closed else np.zeros(np.broadcast(x, y).shape, bool)
        n, b = self.halfplanes()
        out = np.ones(np.broadcast(x, y).shape, bool)
        for (nx, ny), bb in zip(n, b):
            s = nx * x + ny * y - bb
            out &= (s <= tol) if closed else (s < -tol)
        return out

    @property
    def barycenter(self):
        if self.flag == "full":
            c = self.shape.centroid
            return np.array([c.x, c.y])
        return self.vertices.mean(axis=0)

    @property
    def inradius(self):
        if self.flag != "full":
            return 0.0
        n, b = self.halfplanes()
        res = linprog([0.0, 0.0, -1.0], A_ub=np.column_stack([n, np.ones(len(b))]), b_ub=b,
                      bounds=[(None, None), (None, None), (0, None)], method="highs")
        return float(res.x[2])

    @property
    def max_radius(self):
        pts = self.boundary_points()
        return float(np.hypot(pts[:, 0], pts[:, 1]).max()) if len(pts) else 0.0

    def chords(self, tol=1e-9):
        """Oriented boundary chords with both endpoints on the unit circle."""
        out = []
        k = len(self.vertices)
        if self.flag != "full":
            return out
        for i in range(k):
            p, q = self.vertices[i], self.vertices[(i + 1) % k]
            if self.edges[i] == "chord" and abs(np.hypot(*p) - 1) < tol and abs(np.hypot(*q) - 1) < tol:
                out.append((p.copy(), q.copy()))
        return out

    def to_json(self):
        return {
            "flag": self.flag,
            "vertices": self.vertices.tolist(),
            "edges": [e if isinstance(e, str) else {"center": list(e.center), "radius": e.radius}
                      for e in self.edges],
        }


def _is_convex_ccw(v, tol=1e-14):
    d1 = np.roll(v, -1, axis=0) - v
    d2 = np.roll(d1, -1, axis=0)
    cross = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    return bool((cross >= -tol).all() and cross.sum() > 0)


def _drop_collinear(xy, tol=1e-13):
    keep = []
    k = len(xy)
    for i in range(k):
        a, b, c = xy[i - 1], xy[i], xy[(i + 1) % k]
        cr = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
        if cr > tol:
            keep.append(b)
    return np.array(keep)


def _on_segment(v, x, y, tol):
    p = v[0]
    q = v[1] if len(v) > 1 else v[0]
    d = q - p
    L2 = float(d @ d)
    if L2 == 0:
        return np.hypot(x - p[0], y - p[1]) <= tol
    t = np.clip(((x - p[0]) * d[0] + (y - p[1]) * d[1]) / L2, 0.0, 1.0)
    return np.hypot(x - p[0] - t * d[0], y - p[1] - t * d[1]) <= tol


def finiteness_hull(phi: BoundaryFunction) -> PlanarConvexRegion:
    """Interior of the convex hull of the finite nodes, with a degeneracy flag."""
    pts = phi.finite_points()
    k = len(pts)
    if k == 0:
        return PlanarConvexRegion(np.zeros((0, 2)), (), "empty")
    if k == 1:
        return PlanarConvexRegion(pts, ("chord",), "point")
    if k == 2:
        return PlanarConvexRegion(pts, ("chord",) * 2, "segment")
    # points on the circle in angular order are already a convex polygon
    return PlanarConvexRegion(_drop_collinear(pts))
