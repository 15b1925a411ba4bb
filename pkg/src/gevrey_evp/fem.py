"""Structured P1 finite elements on the unit square.

The mesh splits an m-by-m grid of squares into two congruent right isosceles
triangles each, all by the same lower-left to upper-right diagonal.  Assembly
produces the pair of sparse symmetric matrices of the generalized eigenvalue
problem A u = lambda M u over the (m-1)^2 interior nodes:

    A[i][j] = sum_T int_T a grad(phi_i).grad(phi_j) + b phi_i phi_j
    M[i][j] = sum_T int_T c phi_i phi_j

Element integrals use the 3-point edge-midpoint rule (exact for quadratics)
with the coefficients frozen at the quadrature points; Dirichlet rows and
columns are eliminated.  Interior nodes are ordered lexicographically, so
assembly is bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .coefficients import CHI1, CoefficientModel

__all__ = [
    "Mesh",
    "SparseSystem",
    "build_mesh",
    "assemble",
    "Assembler",
    "laplace_lambda1_reference",
]

# Per-orientation local stiffness (h-independent, |T| folded in) for the
# lower triangle [(0,0),(h,0),(h,h)] and upper triangle [(0,0),(h,h),(0,h)].
_G_LOWER = 0.5 * np.array([[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]])
_G_UPPER = 0.5 * np.array([[1.0, 0.0, -1.0], [0.0, 1.0, -1.0], [-1.0, -1.0, 2.0]])

# P1 basis values at the three edge midpoints (m01, m12, m02); the mass
# pattern for midpoint k is the outer product of row k with itself.
_MID_PHI = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])
_MID_OUTER = np.einsum("kp,kq->kpq", _MID_PHI, _MID_PHI)


class Mesh:
    """Uniform triangulation of (0,1)^2 with (m+1)^2 vertices.

    Precomputes, per triangle: the interior-dof indices of its vertices
    (-1 on the boundary) and the coordinates of its three edge midpoints.
    """

    def __init__(self, m: int):
        if m < 2:
            raise ValueError(f"mesh needs m >= 2 cells per side, got {m}")
        self.m = int(m)
        self.h = 1.0 / m
        self.n_vertices = (m + 1) ** 2
        self.n_triangles = 2 * m * m
        self.n_dof = (m - 1) ** 2

        cells = np.arange(m * m)
        ci = cells % m
        cj = cells // m

        def dof(i, j):
            inner = (i >= 1) & (i <= m - 1) & (j >= 1) & (j <= m - 1)
            return np.where(inner, (j - 1) * (m - 1) + (i - 1), -1)

        # vertex dof indices, shape (2, m*m, 3): orientation 0 = lower, 1 = upper
        self.tri_dofs = np.stack(
            [
                np.stack([dof(ci, cj), dof(ci + 1, cj), dof(ci + 1, cj + 1)], axis=1),
                np.stack([dof(ci, cj), dof(ci + 1, cj + 1), dof(ci, cj + 1)], axis=1),
            ]
        )
        h = self.h
        x = ci * h
        y = cj * h
        # edge midpoints in the order (m01, m12, m02), shape (2, m*m, 3)
        self.mid_x1 = np.stack(
            [
                np.stack([x + 0.5 * h, x + h, x + 0.5 * h], axis=1),
                np.stack([x + 0.5 * h, x + 0.5 * h, x], axis=1),
            ]
        )
        self.mid_x2 = np.stack(
            [
                np.stack([y, y + 0.5 * h, y + 0.5 * h], axis=1),
                np.stack([y + 0.5 * h, y + h, y + 0.5 * h], axis=1),
            ]
        )


def build_mesh(m: int) -> Mesh:
    """Uniform triangular mesh with m cells per side; (m-1)^2 interior dof."""
    return Mesh(m)


@dataclass(frozen=True)
class SparseSystem:
    """Stiffness-plus-reaction matrix A and weighted mass matrix M (CSR)."""

    A: sp.csr_matrix
    M: sp.csr_matrix
    n_dof: int


def _scatter(mesh: Mesh, values: np.ndarray) -> sp.csr_matrix:
    """Scatter per-triangle local 3x3 blocks into a CSR matrix.

    ``values`` has shape (2, n_cells, 3, 3).  Every off-diagonal entry
    receives exactly two contributions (the two triangles sharing the edge),
    so the summed matrix is exactly symmetric whenever the local blocks are.
    """
    rows, cols, data = [], [], []
    for o in range(2):
        dofs = mesh.tri_dofs[o]
        for p in range(3):
            for q in range(3):
                r = dofs[:, p]
                c = dofs[:, q]
                keep = (r >= 0) & (c >= 0)
                rows.append(r[keep])
                cols.append(c[keep])
                data.append(values[o, keep, p, q])
    mat = sp.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(mesh.n_dof, mesh.n_dof),
    ).tocsr()
    mat.sort_indices()
    return mat


class Assembler:
    """Repeated assembly for one (mesh, model) pair at varying parameters.

    Caches the midpoint evaluation tables of the diffusion field and, since
    b and c do not depend on the parameters for any built-in model, the
    entire mass matrix and reaction contribution.
    """

    def __init__(self, mesh: Mesh, model: CoefficientModel):
        self.mesh = mesh
        self.model = model
        self._a_cache = model.precompute(mesh.mid_x1, mesh.mid_x2)
        scale = mesh.h * mesh.h / 6.0
        b_mid = model.b(mesh.mid_x1, mesh.mid_x2, np.zeros(1))
        c_mid = model.c(mesh.mid_x1, mesh.mid_x2, np.zeros(1))
        self._b_blocks = scale * np.einsum("otk,kpq->otpq", b_mid, _MID_OUTER)
        self._M = _scatter(mesh, scale * np.einsum("otk,kpq->otpq", c_mid, _MID_OUTER))

    def system(self, y) -> SparseSystem:
        a_mid = self.model.a_cached(self._a_cache, y)
        a_mean = a_mid.mean(axis=2)
        g = np.stack([_G_LOWER, _G_UPPER])
        blocks = np.einsum("ot,opq->otpq", a_mean, g) + self._b_blocks
        return SparseSystem(_scatter(self.mesh, blocks), self._M, self.mesh.n_dof)


def assemble(mesh: Mesh, model: CoefficientModel, y) -> SparseSystem:
    """Assemble the generalized eigenproblem matrices at parameter y."""
    return Assembler(mesh, model).system(y)


def laplace_lambda1_reference() -> float:
    """Smallest Dirichlet-Laplace eigenvalue of the unit square, 2 pi^2."""
    return CHI1
