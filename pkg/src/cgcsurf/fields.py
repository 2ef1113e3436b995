"""Sampled fields on uniform square grids and sampled entire graphs."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from . import extended


def grid_axis(n: int, half_width: float = 1.0) -> np.ndarray:
    if n < 3:
        raise ValueError("grid needs at least 3 nodes per side")
    return np.linspace(-half_width, half_width, n)


class GridField:
    """Extended-real values on an n x n grid over [-R, R]^2.

    ``values[i, j]`` sits at ``(axis[i], axis[j])``.
    """

    def __init__(self, values, half_width=1.0, region=None, closed_convex=False, meta=None):
        v = np.array(values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("values must be a square 2-D array")
        extended.finite_mask(v)
        v.setflags(write=False)
        self.values = v
        self.half_width = float(half_width)
        self.region = region
        self.closed_convex = bool(closed_convex)
        self.meta = dict(meta or {})

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def h(self):
        return 2.0 * self.half_width / (self.n - 1)

    @property
    def axis(self):
        return grid_axis(self.n, self.half_width)

    def mesh(self):
        a = self.axis
        return np.meshgrid(a, a, indexing="ij")

    @property
    def finite(self):
        return np.isfinite(self.values)

    def with_values(self, values, **meta):
        return type(self)(values, half_width=self.half_width, region=self.region,
                          closed_convex=self.closed_convex, meta={**self.meta, **meta})

    def sample(self, x, y):
        """Bilinear interpolation; any +inf corner with positive weight gives +inf."""
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        R, h, n = self.half_width, self.h, self.n
        fx, fy = (x + R) / h, (y + R) / h
        outside = (fx < -1e-9) | (fx > n - 1 + 1e-9) | (fy < -1e-9) | (fy > n - 1 + 1e-9)
        i0 = np.clip(np.floor(fx), 0, n - 2).astype(int)
        j0 = np.clip(np.floor(fy), 0, n - 2).astype(int)
        tx = np.clip(fx - i0, 0.0, 1.0)
        ty = np.clip(fy - j0, 0.0, 1.0)
        # snap to nodes so exact grid points never see a neighbouring +inf
        tx = np.where(np.abs(tx) < 1e-12, 0.0, np.where(np.abs(tx - 1) < 1e-12, 1.0, tx))
        ty = np.where(np.abs(ty) < 1e-12, 0.0, np.where(np.abs(ty - 1) < 1e-12, 1.0, ty))
        out = np.zeros(x.shape)
        bad = outside.copy()
        V = self.values
        for di, dj, w in ((0, 0, (1 - tx) * (1 - ty)), (1, 0, tx * (1 - ty)),
                          (0, 1, (1 - tx) * ty), (1, 1, tx * ty)):
            c = V[i0 + di, j0 + dj]
            inf = ~np.isfinite(c) & (w > 0)
            bad |= inf
            out += np.where(w > 0, w * np.where(np.isfinite(c), c, 0.0), 0.0)
        return np.where(bad, np.inf, out)

    # serialisation ---------------------------------------------------------
    def to_csv(self, path):
        X, Y = self.mesh()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y", "value"])
            for x, y, v in zip(X.ravel(), Y.ravel(), self.values.ravel()):
                w.writerow([extended.fmt(x), extended.fmt(y), extended.fmt(v)])

    def to_dict(self):
        d = {
            "kind": type(self).__name__,
            "grid": self.n,
            "half_width": self.half_width,
            "closed_convex": self.closed_convex,
            "meta": extended.jsonable(self.meta),
            "values": [[extended.to_json(v) for v in row] for row in self.values],
        }
        if self.region is not None:
            d["region"] = self.region.to_json()
        return d

    def to_json(self, path):
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def from_dict(cls, d):
        vals = np.array([[extended.parse(v) for v in row] for row in d["values"]])
        kw = dict(closed_convex=d.get("closed_convex", False), meta=d.get("meta"))
        if cls is DiskField:
            return cls(vals, **kw)
        return cls(vals, half_width=d["half_width"], **kw)

    @classmethod
    def from_json(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))


class DiskField(GridField):
    """GridField on [-1, 1]^2 that is +inf outside the closed unit disk."""

    def __init__(self, values, half_width=1.0, region=None, closed_convex=False, meta=None):
        if half_width != 1.0:
            raise ValueError("DiskField lives on [-1, 1]^2")
        v = np.array(values, dtype=float)
        n = v.shape[0]
        a = grid_axis(n)
        X, Y = np.meshgrid(a, a, indexing="ij")
        v[X * X + Y * Y > 1.0 + 1e-12] = np.inf
        super().__init__(v, 1.0, region, closed_convex, meta)

    @classmethod
    def from_function(cls, f, n, **kw):
        a = grid_axis(n)
        X, Y = np.meshgrid(a, a, indexing="ij")
        inside = X * X + Y * Y <= 1.0 + 1e-12
        v = np.full(X.shape, np.inf)
        v[inside] = f(X[inside], Y[inside])
        return cls(v, **kw)


def disk_mask(n):
    a = grid_axis(n)
    X, Y = np.meshgrid(a, a, indexing="ij")
    return X * X + Y * Y <= 1.0 + 1e-12


class SurfaceMesh:
    """Graph x3 = f(x1, x2) sampled on an n x n grid over [-R, R]^2."""

    def __init__(self, heights, half_width, normals=None, curvature=None, meta=None):
        f = np.array(heights, dtype=float)
        if f.ndim != 2 or f.shape[0] != f.shape[1]:
            raise ValueError("heights must be a square 2-D array")
        if not np.isfinite(f).all():
            raise ValueError("mesh heights must be finite")
        f.setflags(write=False)
        self.heights = f
        self.half_width = float(half_width)
        self.normals = None if normals is None else np.array(normals, dtype=float)
        self.curvature = None if curvature is None else np.array(curvature, dtype=float)
        self.meta = dict(meta or {})

    @property
    def n(self):
        return self.heights.shape[0]

    @property
    def h(self):
        return 2.0 * self.half_width / (self.n - 1)

    @property
    def axis(self):
        return grid_axis(self.n, self.half_width)

    def mesh(self):
        a = self.axis
        return np.meshgrid(a, a, indexing="ij")

    def vertices(self):
        X, Y = self.mesh()
        return np.column_stack([X.ravel(), Y.ravel(), self.heights.ravel()])

    def spacelike_margin(self):
        """min over grid edges of (edge length - |df|); positive means spacelike."""
        f, h = self.heights, self.h
        d = [np.abs(np.diff(f, axis=0)).max(), np.abs(np.diff(f, axis=1)).max()]
        return float(h - max(d))

    def is_spacelike(self):
        return self.spacelike_margin() > 0

    def to_obj(self, path):
        n = self.n
        with open(path, "w") as fh:
            for x, y, z in self.vertices():
                fh.write(f"v {extended.fmt(x)} {extended.fmt(y)} {extended.fmt(z)}\n")
            idx = np.arange(n * n).reshape(n, n) + 1
            for i in range(n - 1):
                for j in range(n - 1):
                    a, b, c, d = idx[i, j], idx[i + 1, j], idx[i + 1, j + 1], idx[i, j + 1]
                    fh.write(f"f {a} {b} {c}\nf {a} {c} {d}\n")

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y", "value"])
            for x, y, z in self.vertices():
                w.writerow([extended.fmt(x), extended.fmt(y), extended.fmt(z)])

    def to_json(self, path):
        d = {"kind": "SurfaceMesh", "grid": self.n, "half_width": self.half_width,
             "meta": extended.jsonable(self.meta), "heights": self.heights.tolist()}
        Path(path).write_text(json.dumps(d))
