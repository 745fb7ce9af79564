"""Vectorized numpy assembly kernels (pure-python backend).

All kernels return COO triplets ``(rows, cols, vals)``; duplicate entries are
summed by the caller.  Integrals of P1 products are evaluated with the exact
closed-form triangle/segment formulas, so the only floating-point error source
is summation.  Element blocks are symmetric by construction, which makes the
assembled operators exactly symmetric.
"""

import numpy as np

BACKEND_NAME = "numpy"


def _tri_geometry(vertices, triangles):
    """Per-triangle areas and P1 basis gradients.

    Returns (area, grads) with grads of shape (nt, 3, 2); grads[t, i] is the
    constant gradient of the barycentric function of local vertex i.
    """
    p = vertices[triangles]  # (nt, 3, 2)
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    area = 0.5 * det
    # grad(phi_i) = (y_j - y_k, x_k - x_j) / (2A), (i, j, k) cyclic
    grads = np.empty((len(triangles), 3, 2))
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        grads[:, i, 0] = p[:, j, 1] - p[:, k, 1]
        grads[:, i, 1] = p[:, k, 0] - p[:, j, 0]
    grads /= det[:, None, None]
    return area, grads


def _scatter(triangles, blocks):
    nloc = triangles.shape[1]
    rows = np.repeat(triangles, nloc, axis=1).ravel()
    cols = np.tile(triangles, (1, nloc)).ravel()
    return rows, cols, blocks.reshape(len(triangles), -1).ravel()


def tri_weighted_mass(vertices, triangles, weight):
    """Triplets of the weighted mass matrix ``[int w_h phi_i phi_j]``.

    ``weight`` holds nodal values of a P1 field w_h; the cubic products are
    integrated exactly: diag entries A/60*(4 w_i + 2 S), off-diag
    A/60*(w_i + w_j + S) with S the vertex sum.
    """
    area, _ = _tri_geometry(vertices, triangles)
    w = weight[triangles]  # (nt, 3)
    s = w.sum(axis=1)
    blocks = np.empty((len(triangles), 3, 3))
    for i in range(3):
        for j in range(3):
            if i == j:
                blocks[:, i, j] = 4.0 * w[:, i] + 2.0 * s
            else:
                blocks[:, i, j] = w[:, i] + w[:, j] + s
    blocks *= (area / 60.0)[:, None, None]
    return _scatter(triangles, blocks)


def tri_stiffness(vertices, triangles, gamma, kappa_weight, theta):
    """Triplets of ``int gamma phi_i phi_j + kappa_h grad phi_i . Theta grad phi_j``.

    ``gamma`` is a constant reaction coefficient, ``kappa_weight`` nodal values
    of a P1 diffusion field (its triangle mean is exact for P1 weights), and
    ``theta`` a constant 2x2 SPD tensor.
    """
    area, grads = _tri_geometry(vertices, triangles)
    kbar = kappa_weight[triangles].mean(axis=1)
    gtheta = grads @ theta  # (nt, 3, 2)
    blocks = np.einsum("tid,tjd->tij", gtheta, grads)
    blocks *= (kbar * area)[:, None, None]
    if gamma != 0.0:
        mdiag = gamma * area / 6.0
        moff = gamma * area / 12.0
        for i in range(3):
            for j in range(3):
                blocks[:, i, j] += mdiag if i == j else moff
    return _scatter(triangles, blocks)


def tri_stiffness_bilinear_gradient(vertices, triangles, theta, u, w):
    """Vector g_k = d/d kappa_k [ u^T K(kappa_h) w ] for a P1 kappa field."""
    area, grads = _tri_geometry(vertices, triangles)
    gu = np.einsum("tid,ti->td", grads, u[triangles])
    gw = np.einsum("tid,ti->td", grads, w[triangles])
    c = area * np.einsum("td,de,te->t", gu, theta, gw) / 3.0
    g = np.zeros(len(vertices))
    np.add.at(g, triangles.ravel(), np.repeat(c, 3))
    return g


def seg_weighted_mass(vertices, segments, weight):
    """Triplets of the 1D weighted mass matrix on a chain of segments.

    ``vertices`` are 2D coordinates, ``segments`` index pairs into the chain's
    own DOF numbering, ``weight`` nodal values on chain DOFs.  Exact cubic
    formulas: diag h/12*(3 w_i + w_j), off-diag h/12*(w_i + w_j).
    """
    p = vertices[segments]
    h = np.linalg.norm(p[:, 1] - p[:, 0], axis=1)
    w = weight[segments]
    blocks = np.empty((len(segments), 2, 2))
    blocks[:, 0, 0] = 3.0 * w[:, 0] + w[:, 1]
    blocks[:, 1, 1] = w[:, 0] + 3.0 * w[:, 1]
    blocks[:, 0, 1] = w[:, 0] + w[:, 1]
    blocks[:, 1, 0] = blocks[:, 0, 1]
    blocks *= (h / 12.0)[:, None, None]
    return _scatter(segments, blocks)


def seg_stiffness(vertices, segments, gamma, kappa, theta):
    """Triplets of ``int gamma psi_i psi_j + kappa theta psi_i' psi_j' ds`` (1D P1)."""
    p = vertices[segments]
    h = np.linalg.norm(p[:, 1] - p[:, 0], axis=1)
    blocks = np.empty((len(segments), 2, 2))
    kt = kappa * theta
    blocks[:, 0, 0] = gamma * h / 3.0 + kt / h
    blocks[:, 1, 1] = blocks[:, 0, 0]
    blocks[:, 0, 1] = gamma * h / 6.0 - kt / h
    blocks[:, 1, 0] = blocks[:, 0, 1]
    return _scatter(segments, blocks)


def locate_points(vertices, triangles, points, cell_lookup, tol):
    """Containing triangle and barycentric weights for each query point.

    ``cell_lookup(point)`` yields candidate triangle indices in ascending
    order of preference; the first triangle whose barycentric coordinates are
    all >= -tol wins, which resolves shared-edge ties deterministically.
    Returns (tri_index, weights) arrays; tri_index -1 marks points outside.
    """
    m = len(points)
    tri_idx = np.full(m, -1, dtype=np.int64)
    weights = np.zeros((m, 3))
    for q, pt in enumerate(points):
        for t in cell_lookup(pt):
            lam = _barycentric(vertices, triangles, t, pt)
            if lam.min() >= -tol:
                tri_idx[q] = t
                weights[q] = np.clip(lam, 0.0, 1.0)
                weights[q] /= weights[q].sum()
                break
    return tri_idx, weights


def _barycentric(vertices, triangles, t, pt):
    p1, p2, p3 = vertices[triangles[t]]
    det = (p2[0] - p1[0]) * (p3[1] - p1[1]) - (p2[1] - p1[1]) * (p3[0] - p1[0])
    l2 = ((pt[0] - p1[0]) * (p3[1] - p1[1]) - (pt[1] - p1[1]) * (p3[0] - p1[0])) / det
    l3 = ((p2[0] - p1[0]) * (pt[1] - p1[1]) - (p2[1] - p1[1]) * (pt[0] - p1[0])) / det
    return np.array([1.0 - l2 - l3, l2, l3])
