"""Center-of-gravity balancing of transplanted coordinates.

After pulling the hemisphere coordinates back through the map, the two
equatorial coordinates must have zero mean before they qualify as
Neumann trial functions.  A two-parameter family of disc automorphisms
T_a suffices; this module finds the parameter a that nulls both first
moments with a damped Newton iteration (gradient-descent fallback).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fem import assemble_mass
from .mesh import MapSample, SurfaceMesh
from .transplant import transplant_coords

BALANCE_REL_TOL = 1e-10      # residual tolerance relative to total area
MAX_ABS_A = 0.999999
_FD_STEP = 1e-6


class BalanceError(RuntimeError):
    """Balancing did not converge (a numerical failure: existence of a
    balancing parameter is guaranteed)."""


@dataclass(frozen=True)
class BalanceResult:
    """Mobius parameter nulling the center of gravity."""

    a: complex
    residual: float
    iterations: int

    def to_json_dict(self) -> dict:
        return {"a": [float(self.a.real), float(self.a.imag)],
                "residual": float(self.residual),
                "iterations": int(self.iterations)}


def _moments(mesh, f, a, m1):
    sf = transplant_coords(mesh, f, a)
    return np.array([m1 @ sf.x1, m1 @ sf.x2])


def center_of_gravity(mesh: SurfaceMesh, f: MapSample, a: complex = 0.0,
                      ) -> tuple[float, float]:
    """First moments (integral of x1, integral of x2) of the transplant,
    under consistent-mass quadrature."""
    m1 = assemble_mass(mesh) @ np.ones(mesh.vertex_count)
    g = _moments(mesh, f, complex(a), m1)
    return float(g[0]), float(g[1])


def balance_center_of_mass(mesh: SurfaceMesh, f: MapSample,
                           tol_rel: float = BALANCE_REL_TOL,
                           max_iter: int = 50) -> BalanceResult:
    """Find a with ||G(a)|| <= tol_rel * area, starting from a = 0.

    Damped Newton on the moment map with a finite-difference Jacobian;
    steps are halved to stay inside the disc and to force a residual
    decrease.  Falls back to 200 gradient-descent steps on ||G||^2 if
    Newton stalls.
    """
    m1 = assemble_mass(mesh) @ np.ones(mesh.vertex_count)
    area = float(m1.sum())
    tol = tol_rel * area

    def G(ac):
        return _moments(mesh, f, ac, m1)

    a = np.zeros(2)
    g = G(0.0 + 0.0j)
    gnorm = np.linalg.norm(g)
    iterations = 0
    for _ in range(max_iter):
        if gnorm <= tol:
            return BalanceResult(complex(a[0], a[1]), float(gnorm), iterations)
        J = np.empty((2, 2))
        for col in range(2):
            da = np.zeros(2)
            da[col] = _FD_STEP
            ap = a + da
            if np.hypot(*ap) >= 1.0:
                ap = a - da
                J[:, col] = (g - G(complex(*ap))) / _FD_STEP
            else:
                J[:, col] = (G(complex(*ap)) - g) / _FD_STEP
        try:
            step = np.linalg.solve(J, -g)
        except np.linalg.LinAlgError:
            break
        improved = False
        for _halving in range(40):
            cand = a + step
            if np.hypot(*cand) <= MAX_ABS_A:
                gc = G(complex(*cand))
                gcn = np.linalg.norm(gc)
                if gcn < gnorm:
                    a, g, gnorm = cand, gc, gcn
                    improved = True
                    break
            step = 0.5 * step
        iterations += 1
        if not improved:
            break
    if gnorm <= tol:
        return BalanceResult(complex(a[0], a[1]), float(gnorm), iterations)

    # gradient descent on ||G||^2 from the best point found
    lr = 0.1 / area
    for _ in range(200):
        iterations += 1
        J = np.empty((2, 2))
        for col in range(2):
            da = np.zeros(2)
            da[col] = _FD_STEP
            J[:, col] = (G(complex(*(a + da))) - g) / _FD_STEP
        grad = 2.0 * J.T @ g
        for _halving in range(40):
            cand = a - lr * grad
            if np.hypot(*cand) <= MAX_ABS_A:
                gc = G(complex(*cand))
                gcn = np.linalg.norm(gc)
                if gcn < gnorm:
                    a, g, gnorm = cand, gc, gcn
                    lr *= 1.5
                    break
            lr *= 0.5
        if gnorm <= tol:
            return BalanceResult(complex(a[0], a[1]), float(gnorm), iterations)
    raise BalanceError(
        f"balancing did not converge: best residual {gnorm:.3e} "
        f"(target {tol:.3e}) at a = {complex(a[0], a[1])}")


def grid_search_balance(mesh: SurfaceMesh, f: MapSample, n: int = 101,
                        extent: float = 0.99) -> tuple[complex, float]:
    """Brute-force minimizer of ||G(a)|| over an n-by-n grid in the disc.

    Independent cross-check for the Newton solver; returns the best grid
    point and its residual.
    """
    m1 = assemble_mass(mesh) @ np.ones(mesh.vertex_count)
    ticks = np.linspace(-extent, extent, n)
    re, im = np.meshgrid(ticks, ticks, indexing="ij")
    aa = (re + 1j * im).ravel()
    aa = aa[np.abs(aa) < 1.0]

    vals = f.values
    boundary = mesh.boundary_vertex_mask()
    w = (vals[None, :] - aa[:, None]) / (1.0 - np.conj(aa)[:, None] * vals[None, :])
    r = np.abs(w)
    np.divide(w, r, out=w, where=r > 1.0)
    r2 = (w * w.conj()).real
    denom = 1.0 + r2
    x1 = 2.0 * w.real / denom
    x2 = 2.0 * w.imag / denom
    wb = w[:, boundary]
    wb = wb / np.abs(wb)
    x1[:, boundary] = wb.real
    x2[:, boundary] = wb.imag
    g = np.hypot(x1 @ m1, x2 @ m1)
    best = int(np.argmin(g))
    return complex(aa[best]), float(g[best])
