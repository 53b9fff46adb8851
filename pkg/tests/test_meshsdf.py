"""Mesh normalization and mesh -> SDF conversion."""

import numpy as np
import pytest

from sketchsdf.fields import mesh_to_sdf, normalize_mesh, unsigned_distance_field
from sketchsdf.fields.types import TriangleMesh, cell_center_grid
from sketchsdf.mesh.primitives import box_mesh, icosphere


def brute_force_distance(points, mesh):
    from sketchsdf.fields.meshsdf import point_triangle_distances

    v, t = mesh.vertices, mesh.triangles
    best = np.full(len(points), np.inf)
    for tri in t:
        d = point_triangle_distances(
            points,
            np.broadcast_to(v[tri[0]], points.shape),
            np.broadcast_to(v[tri[1]], points.shape),
            np.broadcast_to(v[tri[2]], points.shape),
        )
        best = np.minimum(best, d)
    return best


class TestNormalizeMesh:
    def test_unit_cube(self):
        m = box_mesh(extents=(1, 1, 1), center=(0.5, 0.5, 0.5))
        out = normalize_mesh(m)
        lo, hi = out.bounding_box()
        np.testing.assert_allclose(lo, [-0.8, -0.8, -0.8], atol=1e-12)
        np.testing.assert_allclose(hi, [0.8, 0.8, 0.8], atol=1e-12)

    def test_anisotropic_box(self):
        m = box_mesh(extents=(2, 1, 1), center=(3.0, -1.0, 7.0))
        out = normalize_mesh(m)
        lo, hi = out.bounding_box()
        np.testing.assert_allclose(hi - lo, [1.6, 0.8, 0.8], atol=1e-12)
        np.testing.assert_allclose((hi + lo) / 2, 0, atol=1e-12)
        # Uniform scale: relative shape preserved.
        scale = 1.6 / 2.0
        np.testing.assert_allclose(
            out.vertices,
            (m.vertices - [3.0, -1.0, 7.0]) * scale,
            atol=1e-12,
        )

    def test_idempotent(self, icosphere2):
        once = normalize_mesh(icosphere2)
        twice = normalize_mesh(once)
        np.testing.assert_allclose(once.vertices, twice.vertices, atol=1e-7)

    def test_degenerate_extent(self):
        flat = TriangleMesh(
            np.array([[0.0, 0, 0], [0, 0, 0], [0, 0, 0]]), np.array([[0, 1, 2]])
        )
        with pytest.raises(ValueError, match="degenerate-extent"):
            normalize_mesh(flat)


class TestMeshToSdf:
    def test_sphere_analytic(self, icosphere4):
        sdf = mesh_to_sdf(icosphere4, 32)
        centers = cell_center_grid(32)
        analytic = np.linalg.norm(centers, axis=-1) - 0.5
        assert np.abs(sdf.values - analytic).max() < 0.01

    def test_unsigned_matches_brute_force(self, icosphere2, rng):
        pts = rng.uniform(-0.9, 0.9, size=(200, 3))
        fast = unsigned_distance_field(pts, icosphere2)
        brute = brute_force_distance(pts, icosphere2)
        np.testing.assert_allclose(fast, brute, atol=1e-6)

    def test_cell_center_on_vertex_zero(self):
        # Build a small closed mesh with one vertex exactly at a 4^3 cell
        # center: centers at -1 + (i+.5)/2, so (0.25, 0.25, 0.25).
        target = np.array([0.25, 0.25, 0.25])
        m = icosphere(0.3, 2, center=target - [0.3, 0, 0])  # surface hits target
        sdf = mesh_to_sdf(m, 4)
        val = sdf.values[2, 2, 2]
        assert abs(val) <= 1e-6

    def test_box_center_value(self):
        m = box_mesh(extents=(1.6, 1.6, 1.6))
        sdf = mesh_to_sdf(m, 32)
        # Nearest cell to the origin: distance to a face is ~0.8 - |c|.
        centers = cell_center_grid(32)
        idx = np.unravel_index(
            np.argmin(np.linalg.norm(centers, axis=-1).reshape(-1)), (32, 32, 32)
        )
        c = centers[idx]
        expected = -(0.8 - np.abs(c).max())
        assert sdf.values[idx] == pytest.approx(expected, abs=1e-6)

    def test_sign_flips_crossing_surface(self, icosphere2):
        sdf = mesh_to_sdf(icosphere2, 16)
        centers = cell_center_grid(16)
        r = np.linalg.norm(centers, axis=-1)
        inside = sdf.values < 0
        # Along the +x axis ray through the center row, the sign flips
        # exactly where the analytic radius crosses 0.5.
        j = k = 8
        for i in range(16):
            expected_inside = r[i, j, k] < 0.5
            assert inside[i, j, k] == expected_inside

    def test_box_sign_flips_on_axis(self):
        m = box_mesh(extents=(1.6, 1.6, 1.6))
        sdf = mesh_to_sdf(m, 16)
        centers = cell_center_grid(16)
        inside = np.abs(centers).max(axis=-1) < 0.8
        np.testing.assert_array_equal(sdf.values < 0, inside)

    def test_open_surface_error(self, icosphere2):
        open_mesh = TriangleMesh(
            icosphere2.vertices.copy(), icosphere2.triangles[:-1].copy()
        )
        with pytest.raises(ValueError, match="open-surface"):
            mesh_to_sdf(open_mesh, 8)

    def test_purity_same_inputs_same_outputs(self, icosphere2):
        a = mesh_to_sdf(icosphere2, 8)
        b = mesh_to_sdf(icosphere2, 8)
        np.testing.assert_array_equal(a.values, b.values)
