"""Structured triangulations with labeled boundary segments.

Node ordering on a structured nx-by-ny rectangle grid is row-major: node
``(i, j)`` (column i, row j) gets index ``j*nx + i``, so DOF indices are
bit-stable across runs.  Every grid cell is split along the same diagonal
(lower-left to upper-right), giving ``2*(nx-1)*(ny-1)`` triangles.
"""

import json

import numpy as np

from ..errors import ArgumentError

BOUNDARY_SIDES = ("bottom", "right", "top", "left")
VALID_LABELS = ("A", "I", "D", "N", "none")


class Mesh:
    """Triangle mesh with vertex coordinates and labeled boundary edges.

    Attributes
    ----------
    vertices : (nv, 2) float array
    triangles : (nt, 3) int array, positively oriented
    boundary_edges : list of (i, j, label) tuples
    boundary_node_order : dict label -> ordered node index list (chain order)
    """

    def __init__(self, vertices, triangles, boundary_edges, structured=None):
        self.vertices = np.ascontiguousarray(vertices, dtype=np.float64)
        self.triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        self.boundary_edges = [(int(a), int(b), str(lab)) for a, b, lab in boundary_edges]
        self.structured = structured
        self._check()
        self.boundary_node_order = {
            lab: _chain_order(self._label_edges(lab)) for lab in self.labels()
        }

    def _check(self):
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        area2 = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        if np.any(area2 <= 0):
            raise ArgumentError("mesh has non-positively-oriented triangles")
        for _, _, lab in self.boundary_edges:
            if lab not in VALID_LABELS:
                raise ArgumentError(f"unknown boundary label {lab!r}")

    def labels(self):
        return sorted({lab for _, _, lab in self.boundary_edges if lab != "none"})

    def _label_edges(self, label):
        edges = [(a, b) for a, b, lab in self.boundary_edges if lab == label]
        if not edges:
            raise ArgumentError(f"no boundary edges carry label {label!r}")
        return edges

    def boundary_segments(self, label):
        """Edges of one label as an (ne, 2) index array."""
        return np.array(self._label_edges(label), dtype=np.int64)

    def boundary_nodes(self, label):
        return np.array(self.boundary_node_order[label], dtype=np.int64)

    @property
    def num_vertices(self):
        return len(self.vertices)

    @property
    def num_triangles(self):
        return len(self.triangles)

    def cell_candidates(self, point):
        """Candidate triangle indices for point location, best first.

        On a structured mesh the containing cell is found directly; its two
        triangles are proposed in ascending index order (deterministic tie
        break on shared edges), then all triangles as a fallback sweep.
        """
        if self.structured is not None:
            nx, ny, lx, ly = (self.structured[k] for k in ("nx", "ny", "lx", "ly"))
            hx, hy = lx / (nx - 1), ly / (ny - 1)
            i = min(max(int(point[0] / hx), 0), nx - 2)
            j = min(max(int(point[1] / hy), 0), ny - 2)
            base = 2 * (j * (nx - 1) + i)
            yield base
            yield base + 1
        yield from range(self.num_triangles)

    def to_json(self):
        return {
            "vertices": self.vertices.tolist(),
            "triangles": self.triangles.tolist(),
            "boundary_edges": [[a, b, lab] for a, b, lab in self.boundary_edges],
            "structured": self.structured,
        }

    @classmethod
    def from_json(cls, obj):
        return cls(
            np.array(obj["vertices"], dtype=np.float64),
            np.array(obj["triangles"], dtype=np.int64),
            [(e[0], e[1], e[2]) for e in obj["boundary_edges"]],
            structured=obj.get("structured"),
        )

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def _chain_order(edges):
    """Order the nodes of an edge set that forms a simple open or closed chain.

    Open chains start at the degree-1 endpoint with the lowest node index;
    closed chains start at the lowest node index and proceed toward its
    lower-indexed neighbor.  Branching edge sets are rejected.
    """
    adj = {}
    for a, b in edges:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    if any(len(v) > 2 for v in adj.values()):
        raise ArgumentError("boundary label does not form a simple chain")
    endpoints = sorted(n for n, v in adj.items() if len(v) == 1)
    if endpoints:
        start = endpoints[0]
    else:
        start = min(adj)
    order = [start]
    prev = None
    cur = start
    while True:
        nbrs = [n for n in sorted(adj[cur]) if n != prev]
        if not nbrs:
            break
        nxt = nbrs[0]
        if nxt == start:
            break
        order.append(nxt)
        prev, cur = cur, nxt
        if len(order) > len(adj):
            raise ArgumentError("boundary chain walk did not terminate")
    if len(order) != len(adj):
        raise ArgumentError("boundary label edges are not a single chain")
    return order


def build_rect_mesh(nx, ny, lx, ly, labels=None):
    """Structured triangulation of the rectangle (0, lx) x (0, ly).

    Parameters
    ----------
    nx, ny : node counts per direction (>= 2)
    lx, ly : side lengths (> 0)
    labels : optional dict side -> boundary label, sides from
        {"bottom", "right", "top", "left"}; unlisted sides get "none".
    """
    if nx < 2 or ny < 2:
        raise ArgumentError("nx and ny must be at least 2")
    if lx <= 0 or ly <= 0:
        raise ArgumentError("lx and ly must be positive")
    labels = dict(labels or {})
    for side, lab in labels.items():
        if side not in BOUNDARY_SIDES:
            raise ArgumentError(f"unknown side {side!r}")
        if lab not in VALID_LABELS:
            raise ArgumentError(f"unknown boundary label {lab!r}")

    xs = np.linspace(0.0, lx, nx)
    ys = np.linspace(0.0, ly, ny)
    xv, yv = np.meshgrid(xs, ys)  # row-major: vertex (i, j) -> j*nx + i
    vertices = np.column_stack([xv.ravel(), yv.ravel()])

    triangles = np.empty((2 * (nx - 1) * (ny - 1), 3), dtype=np.int64)
    t = 0
    for j in range(ny - 1):
        for i in range(nx - 1):
            a = j * nx + i
            b = a + 1
            c = a + nx + 1
            d = a + nx
            triangles[t] = (a, b, c)
            triangles[t + 1] = (a, c, d)
            t += 2

    def side_label(side):
        return labels.get(side, "none")

    boundary_edges = []
    for i in range(nx - 1):
        boundary_edges.append((i, i + 1, side_label("bottom")))
    for j in range(ny - 1):
        boundary_edges.append(((j + 1) * nx - 1, (j + 2) * nx - 1, side_label("right")))
    for i in range(nx - 1):
        base = (ny - 1) * nx
        boundary_edges.append((base + i, base + i + 1, side_label("top")))
    for j in range(ny - 1):
        boundary_edges.append((j * nx, (j + 1) * nx, side_label("left")))

    return Mesh(
        vertices,
        triangles,
        boundary_edges,
        structured={"nx": nx, "ny": ny, "lx": float(lx), "ly": float(ly)},
    )
