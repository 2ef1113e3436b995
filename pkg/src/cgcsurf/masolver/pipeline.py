"""Support function to entire surface: solve, dualise, measure curvature."""

from __future__ import annotations

import numpy as np

from ..convexity import mesh_from_support
from ..fields import SurfaceMesh
from ..regions import BoundaryFunction
from .exhaustion import exhaustion_solve
from .problem import SupportSolution


def _psi_at(psi, gauss):
    if callable(psi):
        return np.asarray(psi(gauss[..., 0], gauss[..., 1]), float)
    if np.ndim(psi) == 0:
        return np.full(gauss.shape[:-1], float(psi))
    raise ValueError("curvature check needs psi as a constant or a callable")


def curvature_report(mesh: SurfaceMesh, psi, core: float = 0.5, gauss_radius: float = 0.9) -> dict:
    """sup |kappa / psi(G) - 1| over mesh nodes with |x|_inf <= core R and |G| <= gauss_radius."""
    X, Y = mesh.mesh()
    g = mesh.gauss
    m = (np.maximum(np.abs(X), np.abs(Y)) <= core * mesh.half_width)
    m &= np.hypot(g[..., 0], g[..., 1]) <= gauss_radius
    m[0, :] = m[-1, :] = m[:, 0] = m[:, -1] = False
    ratio = mesh.curvature[m] / _psi_at(psi, g[m])
    dev = np.abs(ratio - 1)
    return {"core_nodes": int(m.sum()), "sup_rel": float(dev.max()) if dev.size else float("nan"),
            "median_rel": float(np.median(dev)) if dev.size else float("nan")}


def minkowski_solve(phi: BoundaryFunction, psi=1.0, R: float = 2.0, n: int = 129, levels: int = 6,
                    mesh_n: int = 65, **kw) -> tuple[SupportSolution, SurfaceMesh]:
    """Exhaustion solve followed by the dual mesh over [-R, R]^2."""
    K = float(psi) if np.ndim(psi) == 0 and not callable(psi) else None
    sol = exhaustion_solve(phi, psi=psi, levels=levels, n=n, K_constant=K, **kw)
    mesh = mesh_from_support(sol.u, R, n=mesh_n)
    sol.diagnostics["curvature"] = curvature_report(mesh, psi)
    g = mesh.gauss
    inside = sol.region.contains(g[..., 0], g[..., 1])
    sol.diagnostics["gauss_inside_region"] = bool(inside.all())
    mesh.meta["curvature"] = sol.diagnostics["curvature"]
    return sol, mesh
