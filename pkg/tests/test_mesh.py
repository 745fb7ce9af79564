import json

import numpy as np
import pytest

from baecv.errors import ArgumentError
from baecv.fem import build_rect_mesh
from baecv.fem.mesh import Mesh

from conftest import EX1_LABELS, EX2_LABELS


class TestBuildRectMesh:
    def test_strip_counts_match_canonical_grid(self, strip_mesh):
        assert strip_mesh.num_vertices == 750
        assert strip_mesh.num_triangles == 1372

    def test_square_counts_match_canonical_grid(self, square_mesh):
        assert square_mesh.num_vertices == 1600
        assert square_mesh.num_triangles == 3042

    def test_smallest_mesh(self):
        m = build_rect_mesh(2, 2, 1.0, 1.0)
        assert m.num_vertices == 4
        assert m.num_triangles == 2

    def test_count_formula(self):
        for nx, ny in [(3, 7), (9, 2), (5, 5)]:
            m = build_rect_mesh(nx, ny, 2.0, 0.5)
            assert m.num_vertices == nx * ny
            assert m.num_triangles == 2 * (nx - 1) * (ny - 1)

    def test_positive_orientation(self, strip_mesh):
        p = strip_mesh.vertices[strip_mesh.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        area2 = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        assert np.all(area2 > 0)

    def test_row_major_node_ordering(self):
        m = build_rect_mesh(4, 3, 3.0, 2.0)
        # node (i, j) -> j*nx + i
        assert np.allclose(m.vertices[0], [0.0, 0.0])
        assert np.allclose(m.vertices[3], [3.0, 0.0])
        assert np.allclose(m.vertices[4], [0.0, 1.0])
        assert np.allclose(m.vertices[11], [3.0, 2.0])

    def test_invalid_counts_raise(self):
        with pytest.raises(ArgumentError):
            build_rect_mesh(1, 5, 1.0, 1.0)
        with pytest.raises(ArgumentError):
            build_rect_mesh(5, 5, 0.0, 1.0)
        with pytest.raises(ArgumentError):
            build_rect_mesh(5, 5, 1.0, 1.0, labels={"middle": "A"})
        with pytest.raises(ArgumentError):
            build_rect_mesh(5, 5, 1.0, 1.0, labels={"bottom": "Q"})


class TestBoundaryLabels:
    def test_labels_partition_boundary(self, strip_mesh):
        # 2*(nx-1) + 2*(ny-1) boundary edges, each with exactly one label
        assert len(strip_mesh.boundary_edges) == 2 * 49 + 2 * 14
        labs = {lab for _, _, lab in strip_mesh.boundary_edges}
        assert labs == {"I", "A"}

    def test_robin_chain_has_50_ordered_nodes(self, strip_mesh):
        nodes = strip_mesh.boundary_nodes("I")
        assert len(nodes) == 50
        x = strip_mesh.vertices[nodes][:, 0]
        assert np.all(np.diff(x) > 0)
        assert np.all(strip_mesh.vertices[nodes][:, 1] == 0.0)

    def test_multi_side_chain_is_ordered_walk(self, square_mesh):
        nodes = square_mesh.boundary_nodes("D")
        # left + bottom sides share the corner node
        assert len(nodes) == 40 + 40 - 1
        p = square_mesh.vertices[nodes]
        steps = np.linalg.norm(np.diff(p, axis=0), axis=1)
        assert np.allclose(steps, 1.0 / 39.0)

    def test_missing_label_raises(self, strip_mesh):
        with pytest.raises(ArgumentError):
            strip_mesh.boundary_segments("D")


class TestMeshJson:
    def test_round_trip_is_exact(self, small_strip_mesh, tmp_path):
        path = tmp_path / "mesh.json"
        small_strip_mesh.save(path)
        loaded = Mesh.load(path)
        assert np.array_equal(loaded.vertices, small_strip_mesh.vertices)
        assert np.array_equal(loaded.triangles, small_strip_mesh.triangles)
        assert loaded.boundary_edges == small_strip_mesh.boundary_edges
        assert loaded.structured == small_strip_mesh.structured

    def test_export_is_plain_json(self, small_strip_mesh, tmp_path):
        path = tmp_path / "mesh.json"
        small_strip_mesh.save(path)
        with open(path) as fh:
            obj = json.load(fh)
        assert set(obj) == {"vertices", "triangles", "boundary_edges", "structured"}
