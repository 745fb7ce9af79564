"""Operator assembly, observation maps, and boundary restrictions.

Spaces are addressed by id: ``"domain"`` is the P1 space on mesh vertices,
``"boundary:<label>"`` the 1D P1 space on a labeled boundary chain (DOFs in
chain order).  Assembled matrices are CSR and exactly symmetric because the
element blocks are.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..errors import ArgumentError
from .backend import kernels


@dataclass
class FeField:
    """Coefficient vector over a function space."""

    space_id: str
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.float64)

    def copy(self):
        return FeField(self.space_id, self.coeffs.copy())


@dataclass
class AssembledOperator:
    """Symmetric sparse operator bound to a function space."""

    matrix: sp.csr_matrix
    space_id: str

    @property
    def shape(self):
        return self.matrix.shape

    def toarray(self):
        return self.matrix.toarray()


def space_dim(mesh, space_id):
    if space_id == "domain":
        return mesh.num_vertices
    if space_id.startswith("boundary:"):
        return len(mesh.boundary_nodes(space_id.split(":", 1)[1]))
    raise ArgumentError(f"unknown space {space_id!r}")


def _domain_operator(mesh, rows, cols, vals):
    n = mesh.num_vertices
    return sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()


def _boundary_chain(mesh, label):
    """Chain nodes and segments renumbered into chain DOFs."""
    nodes = mesh.boundary_nodes(label)
    pos = {int(n): k for k, n in enumerate(nodes)}
    segs = np.array(
        [[pos[a], pos[b]] for a, b in mesh.boundary_segments(label)], dtype=np.int64
    )
    return nodes, segs


def assemble_mass(mesh, space_id, weight=None):
    """Mass matrix ``int w_h phi_i phi_j`` (w = 1 by default, else P1 nodal).

    Row sums reproduce the measure of each basis function's support by the
    partition of unity, so ``sum(M)`` equals the measure of the space.
    """
    if space_id == "domain":
        w = np.ones(mesh.num_vertices) if weight is None else np.asarray(weight, float)
        rows, cols, vals = kernels.tri_weighted_mass(mesh.vertices, mesh.triangles, w)
        return AssembledOperator(_domain_operator(mesh, rows, cols, vals), space_id)
    if space_id.startswith("boundary:"):
        label = space_id.split(":", 1)[1]
        nodes, segs = _boundary_chain(mesh, label)
        nb = len(nodes)
        w = np.ones(nb) if weight is None else np.asarray(weight, float)
        rows, cols, vals = kernels.seg_weighted_mass(mesh.vertices[nodes], segs, w)
        mat = sp.coo_matrix((vals, (rows, cols)), shape=(nb, nb)).tocsr()
        return AssembledOperator(mat, space_id)
    raise ArgumentError(f"unknown space {space_id!r}")


def assemble_stiffness(mesh, space_id, gamma, kappa, theta):
    """Elliptic operator ``int gamma u v + kappa grad u . Theta grad v``.

    ``kappa`` may be a scalar or a P1 nodal field; ``theta`` a scalar or a
    2x2 SPD tensor (scalar on boundary spaces).
    """
    if gamma < 0 or np.any(np.asarray(kappa) < 0):
        raise ArgumentError("gamma and kappa must be nonnegative")
    if space_id == "domain":
        th = np.asarray(theta, dtype=np.float64)
        if th.ndim == 0:
            th = float(th) * np.eye(2)
        if th.shape != (2, 2) or not np.allclose(th, th.T):
            raise ArgumentError("theta must be scalar or symmetric 2x2")
        if np.linalg.eigvalsh(th).min() < 0:
            raise ArgumentError("theta must be positive semidefinite")
        kw = np.asarray(kappa, dtype=np.float64)
        if kw.ndim == 0:
            kw = np.full(mesh.num_vertices, float(kw))
        rows, cols, vals = kernels.tri_stiffness(
            mesh.vertices, mesh.triangles, float(gamma), kw, np.ascontiguousarray(th)
        )
        return AssembledOperator(_domain_operator(mesh, rows, cols, vals), space_id)
    if space_id.startswith("boundary:"):
        label = space_id.split(":", 1)[1]
        nodes, segs = _boundary_chain(mesh, label)
        th = float(np.asarray(theta).reshape(()))
        if th < 0:
            raise ArgumentError("theta must be nonnegative on boundary spaces")
        rows, cols, vals = kernels.seg_stiffness(
            mesh.vertices[nodes], segs, float(gamma), float(kappa), th
        )
        nb = len(nodes)
        mat = sp.coo_matrix((vals, (rows, cols)), shape=(nb, nb)).tocsr()
        return AssembledOperator(mat, space_id)
    raise ArgumentError(f"unknown space {space_id!r}")


def observation_matrix(mesh, points, tol=1e-12):
    """Pointwise P1 interpolation operator, one convex-weight row per point."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    tri_idx, weights = kernels.locate_points(
        mesh.vertices, mesh.triangles, pts, mesh.cell_candidates, tol
    )
    if np.any(tri_idx < 0):
        bad = np.flatnonzero(tri_idx < 0)[0]
        raise ArgumentError(f"observation point {pts[bad].tolist()} lies outside the mesh")
    rows = np.repeat(np.arange(len(pts)), 3)
    cols = mesh.triangles[tri_idx].ravel()
    mat = sp.coo_matrix(
        (weights.ravel(), (rows, cols)), shape=(len(pts), mesh.num_vertices)
    ).tocsr()
    mat.sum_duplicates()
    return mat


def boundary_restriction(mesh, label):
    """Injection of the ordered boundary-chain DOFs into domain DOFs.

    The returned (nv, nb) 0/1 matrix E satisfies ``E.T @ E == I`` on the
    boundary space; ``E @ f_b`` places boundary coefficients at their domain
    node indices.
    """
    nodes = mesh.boundary_nodes(label)
    if len(nodes) < 2:
        raise ArgumentError(f"label {label!r} has fewer than 2 nodes")
    nb = len(nodes)
    mat = sp.coo_matrix(
        (np.ones(nb), (nodes, np.arange(nb))), shape=(mesh.num_vertices, nb)
    ).tocsr()
    return mat


def boundary_load(mesh, label, g):
    """Load vector ``int_label g phi ds`` for constant flux g."""
    b = np.zeros(mesh.num_vertices)
    for a, c in mesh.boundary_segments(label):
        h = np.linalg.norm(mesh.vertices[c] - mesh.vertices[a])
        b[a] += 0.5 * g * h
        b[c] += 0.5 * g * h
    return b
