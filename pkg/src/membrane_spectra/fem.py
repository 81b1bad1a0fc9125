"""Linear (P1) Laplace-Beltrami finite elements on intrinsic meshes.

Stiffness weights are cotangents recovered from edge lengths alone via
the law of cosines, so the assembly works for metrics without an
embedding.  Dirichlet problems are solved on the interior vertices;
Neumann problems on the full matrices with the zero mode detected and
excluded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.linalg import eigsh

from .mesh import SurfaceMesh

DENSE_CUTOFF = 3000          # dofs above which the sparse path is used
RESIDUAL_TOL = 1e-8          # ||K u - lam M u|| / ||M u||
ZERO_MODE_REL = 1e-8         # zero-mode threshold relative to mu_reference


class EigenSolveError(RuntimeError):
    """Eigenvalue solve failed or did not meet the residual tolerance."""


@dataclass
class SpectralResult:
    """Sorted eigenvalues with vertex-sampled, M-normalized eigenfunctions."""

    boundary_condition: str          # "dirichlet" | "neumann"
    eigenvalues: np.ndarray          # ascending, shape (k,)
    eigenfunctions: np.ndarray       # shape (V, k)
    residuals: np.ndarray            # per-pair relative residuals
    mesh_id: str
    zero_mode_gap: float | None = None   # neumann only: mu_1 - mu_0

    def to_json_dict(self, include_eigenfunctions: bool = False) -> dict:
        doc = {
            "bc": self.boundary_condition,
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "residuals": [float(v) for v in self.residuals],
        }
        if self.boundary_condition == "neumann":
            doc["zero_mode_gap"] = float(self.zero_mode_gap)
        if include_eigenfunctions:
            doc["eigenfunctions"] = self.eigenfunctions.T.tolist()
        return doc


def assemble_stiffness(mesh: SurfaceMesh) -> csr_matrix:
    """Cotangent-weight stiffness matrix from intrinsic edge lengths.

    Symmetric positive semidefinite with zero row sums.
    """
    tri = mesh.triangles
    l2 = mesh.tri_lengths() ** 2
    area = mesh.triangle_areas
    # half-cotangent of the angle at corner c (opposite side c)
    w = np.empty_like(l2)
    for c in range(3):
        a2 = l2[:, c]
        b2 = l2[:, (c + 1) % 3]
        c2 = l2[:, (c + 2) % 3]
        w[:, c] = (b2 + c2 - a2) / (8.0 * area)

    n = mesh.vertex_count
    rows, cols, vals = [], [], []
    for c in range(3):
        i = tri[:, (c + 1) % 3]
        j = tri[:, (c + 2) % 3]
        wc = w[:, c]
        rows += [i, j, i, j]
        cols += [j, i, i, j]
        vals += [-wc, -wc, wc, wc]
    K = coo_matrix((np.concatenate(vals),
                    (np.concatenate(rows), np.concatenate(cols))),
                   shape=(n, n)).tocsr()
    K.sum_duplicates()
    return K


def assemble_mass(mesh: SurfaceMesh, lumped: bool = False) -> csr_matrix:
    """Consistent P1 mass matrix: per triangle (T/12) * [[2,1,1],[1,2,1],[1,1,2]].

    With lumped=True the row sums are collected on the diagonal (T/3 per
    corner).  Either way 1^T M 1 equals the total area exactly.
    """
    tri = mesh.triangles
    area = mesh.triangle_areas
    n = mesh.vertex_count
    if lumped:
        rows = tri.ravel()
        vals = np.repeat(area / 3.0, 3)
        M = coo_matrix((vals, (rows, rows)), shape=(n, n)).tocsr()
    else:
        rows, cols, vals = [], [], []
        for a in range(3):
            for b in range(3):
                rows.append(tri[:, a])
                cols.append(tri[:, b])
                vals.append(area * ((2.0 if a == b else 1.0) / 12.0))
        M = coo_matrix((np.concatenate(vals),
                        (np.concatenate(rows), np.concatenate(cols))),
                       shape=(n, n)).tocsr()
    M.sum_duplicates()
    return M


def _solve_gevp(K, M, k: int, method: str = "auto"):
    """k smallest eigenpairs of K u = lam M u (both sparse, M > 0)."""
    n = K.shape[0]
    if k < 1 or k > n:
        raise EigenSolveError(f"requested {k} eigenpairs from {n} dofs")
    if method == "auto":
        method = "dense" if n <= DENSE_CUTOFF else "sparse"
    if method == "dense":
        vals, vecs = eigh(K.toarray(), M.toarray(),
                          subset_by_index=[0, k - 1])
    elif method == "sparse":
        if k >= n:
            raise EigenSolveError("sparse solver needs k < dof count")
        # shift slightly below the spectrum; scaled with the metric so the
        # solve is invariant under global rescaling of edge lengths
        sigma = -0.1 / M.sum()
        vals, vecs = eigsh(K.tocsc(), k=k, M=M.tocsc(), sigma=sigma)
    else:
        raise ValueError(f"unknown eigensolver method {method!r}")
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]

    mv = M @ vecs
    # M-normalize
    norms = np.sqrt(np.einsum("ij,ij->j", vecs, mv))
    vecs = vecs / norms
    mv = mv / norms
    res = np.linalg.norm(K @ vecs - vals * mv, axis=0) / np.linalg.norm(mv, axis=0)
    if np.max(res) > RESIDUAL_TOL:
        raise EigenSolveError(
            f"eigensolver residuals too large: max {np.max(res):.3e} "
            f"(tolerance {RESIDUAL_TOL:.0e}); residuals {res.tolist()}"
        )
    return vals, vecs, res


def solve_dirichlet(mesh: SurfaceMesh, k: int, method: str = "auto",
                    lumped: bool = False) -> SpectralResult:
    """k smallest eigenpairs with u = 0 on the boundary.

    The matrices are restricted to interior vertices; eigenfunctions are
    re-embedded with exact zeros on boundary vertices.
    """
    interior = mesh.interior_vertex_indices()
    if interior.size < k:
        raise EigenSolveError(
            f"only {interior.size} interior dofs, cannot compute {k} eigenpairs")
    K = assemble_stiffness(mesh)
    M = assemble_mass(mesh, lumped=lumped)
    Ki = K[np.ix_(interior, interior)].tocsr()
    Mi = M[np.ix_(interior, interior)].tocsr()
    vals, vecs, res = _solve_gevp(Ki, Mi, k, method)
    full = np.zeros((mesh.vertex_count, k))
    full[interior] = vecs
    return SpectralResult("dirichlet", vals, full, res, mesh.descriptor())


def solve_neumann(mesh: SurfaceMesh, k: int, method: str = "auto",
                  lumped: bool = False) -> SpectralResult:
    """k smallest nonzero eigenpairs of the free problem.

    The Neumann condition is natural and never imposed.  The constant
    zero mode is detected by threshold and excluded; returned
    eigenfunctions are projected to exact zero M-mean.
    """
    if k < 1:
        raise EigenSolveError("k must be >= 1")
    K = assemble_stiffness(mesh)
    M = assemble_mass(mesh, lumped=lumped)
    vals, vecs, res = _solve_gevp(K, M, k + 2, method)

    scale = K.diagonal().sum() / M.diagonal().sum()
    floor = 1e-12 * scale
    above = vals > floor
    if not above.any():
        raise EigenSolveError("no eigenvalue above the zero-mode floor")
    mu_ref = vals[above][0]
    zero = vals < ZERO_MODE_REL * mu_ref
    nzero = int(zero.sum())
    if nzero > 1:
        raise EigenSolveError(
            f"{nzero} numerically zero Neumann modes: mesh is disconnected")
    if nzero == 0:
        raise EigenSolveError("constant Neumann mode not found among the "
                              "smallest eigenvalues")
    mu0 = vals[0]
    vals, vecs, res = vals[1:k + 1], vecs[:, 1:k + 1], res[1:k + 1]

    # enforce the zero-mean side condition exactly
    ones = np.ones(mesh.vertex_count)
    m1 = M @ ones
    area = m1.sum()
    vecs = vecs - ones[:, None] * ((m1 @ vecs) / area)
    norms = np.sqrt(np.einsum("ij,ij->j", vecs, M @ vecs))
    vecs = vecs / norms
    return SpectralResult("neumann", vals, vecs, res, mesh.descriptor(),
                          zero_mode_gap=float(vals[0] - mu0))


def rayleigh_quotient(mesh: SurfaceMesh, u: np.ndarray,
                      K=None, M=None) -> float:
    """(u^T K u) / (u^T M u); matrices are assembled unless supplied."""
    u = np.asarray(u, dtype=float)
    if K is None:
        K = assemble_stiffness(mesh)
    if M is None:
        M = assemble_mass(mesh)
    denom = float(u @ (M @ u))
    if denom <= 0.0:
        raise ValueError("Rayleigh quotient of a zero function")
    return float(u @ (K @ u)) / denom
