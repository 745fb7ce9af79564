"""Matrix-free actions of parameter-weighted element operators.

Assembling a fresh sparse matrix for every derivative direction would
dominate the sensitivity solves; these appliers precompute the triangle
geometry once and evaluate weighted-operator actions with the same exact
P1-product formulas as the assembly kernels.
"""

import numpy as np

from ._kernels_np import _tri_geometry
from .backend import kernels


class TriOps:
    """Per-triangle actions on a fixed 2D mesh."""

    def __init__(self, mesh):
        self.mesh = mesh
        self.tri = mesh.triangles
        self.nv = mesh.num_vertices
        self.area, self.grads = _tri_geometry(mesh.vertices, mesh.triangles)

    def _scatter(self, loc):
        return np.bincount(self.tri.ravel(), weights=loc.ravel(), minlength=self.nv)

    def wmass_action(self, c, v):
        """(int c_h phi_i phi_j) v for P1 nodal weight c, without assembly."""
        ct = c[self.tri]
        vt = v[self.tri]
        sc = ct.sum(axis=1, keepdims=True)
        sv = vt.sum(axis=1, keepdims=True)
        dot = (ct * vt).sum(axis=1, keepdims=True)
        loc = (ct + sc) * sv + dot + (2.0 * ct + sc) * vt
        loc *= self.area[:, None] / 60.0
        return self._scatter(loc)

    def wmass_weight_gradient(self, u, w):
        """Vector g_k = d/dc_k [ u^T M(c) w ]; equals M-action by symmetry."""
        return self.wmass_action(u, w)

    def stiffness_action(self, kappa, theta, v):
        """(int kappa_h grad . Theta grad) v for P1 nodal kappa."""
        kbar = kappa[self.tri].mean(axis=1)
        gv = np.einsum("tid,ti->td", self.grads, v[self.tri])
        flux = gv @ np.asarray(theta).T
        loc = np.einsum("tid,td->ti", self.grads, flux)
        loc *= (kbar * self.area)[:, None]
        return self._scatter(loc)

    def stiffness_weight_gradient(self, theta, u, w):
        """Vector g_k = d/dkappa_k [ u^T K(kappa) w ]."""
        return kernels.tri_stiffness_bilinear_gradient(
            self.mesh.vertices, self.mesh.triangles,
            np.ascontiguousarray(np.asarray(theta, dtype=np.float64)), u, w,
        )


class SegOps:
    """Per-segment actions on a 1D boundary chain (chain DOF numbering)."""

    def __init__(self, mesh, label):
        self.nodes = mesh.boundary_nodes(label)
        pos = {int(n): k for k, n in enumerate(self.nodes)}
        self.seg = np.array(
            [[pos[a], pos[b]] for a, b in mesh.boundary_segments(label)], dtype=np.int64
        )
        p = mesh.vertices[self.nodes][self.seg]
        self.h = np.linalg.norm(p[:, 1] - p[:, 0], axis=1)
        self.nb = len(self.nodes)

    def wmass_action(self, c, v):
        c0, c1 = c[self.seg[:, 0]], c[self.seg[:, 1]]
        v0, v1 = v[self.seg[:, 0]], v[self.seg[:, 1]]
        s = self.h / 12.0
        loc0 = s * ((3.0 * c0 + c1) * v0 + (c0 + c1) * v1)
        loc1 = s * ((c0 + c1) * v0 + (c0 + 3.0 * c1) * v1)
        out = np.zeros(self.nb)
        np.add.at(out, self.seg[:, 0], loc0)
        np.add.at(out, self.seg[:, 1], loc1)
        return out

    def wmass_weight_gradient(self, u, w):
        return self.wmass_action(u, w)
