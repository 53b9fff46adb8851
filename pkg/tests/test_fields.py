"""Field containers, conversions, and the LASF container."""

import numpy as np
import pytest

from sketchsdf.fields import (
    MAX_SDF,
    DenseField3D,
    SparseVoxelGrid,
    denormalize_sparse_sdf,
    derive_occupancy,
    occupancy_from_sdf,
    read_field,
    restrict_to_sparse,
    shell_threshold_for,
    subdivide_occupied,
    union_shapes,
    write_field,
)
from sketchsdf.fields.types import cell_center_grid
from sketchsdf.mesh.primitives import sphere_sdf_values


def brute_force_occupancy(fine: DenseField3D, m: int, threshold=1.0 / 32.0):
    out = np.zeros((m, m, m), dtype=np.float32)
    for i in range(m):
        for j in range(m):
            for k in range(m):
                children = fine.values[
                    2 * i : 2 * i + 2, 2 * j : 2 * j + 2, 2 * k : 2 * k + 2
                ]
                out[i, j, k] = 1.0 if np.any(np.abs(children) <= threshold) else 0.0
    return out


class TestTypes:
    def test_dense_shape_validation(self):
        with pytest.raises(ValueError, match="shape-mismatch"):
            DenseField3D(4, np.zeros((3, 3, 3)))

    def test_occupancy_invariant(self):
        f = DenseField3D(2, np.full((2, 2, 2), 0.5, np.float32), kind="occupancy")
        with pytest.raises(ValueError, match="occupancy-not-binary"):
            f.validate()

    def test_sdf_range_invariant(self):
        f = DenseField3D(2, np.full((2, 2, 2), 2 * MAX_SDF, np.float32))
        with pytest.raises(ValueError, match="sdf-out-of-range"):
            f.validate()

    def test_sparse_sorted_and_closure(self):
        coords = np.array([[3, 3, 3], [0, 0, 0]])
        g = SparseVoxelGrid(8, coords, np.zeros(2))
        assert (g.coords[0] == [0, 0, 0]).all()  # lexicographic sort
        with pytest.raises(ValueError, match="subdivision-closure"):
            g.validate()

    def test_sparse_full_blocks_pass(self):
        occ = DenseField3D(2, np.ones((2, 2, 2), np.float32), kind="occupancy")
        g = subdivide_occupied(occ)
        g.validate()


class TestDeriveOccupancy:
    def test_all_children_near(self):
        fine = DenseField3D(2, np.full((2, 2, 2), 0.02, np.float32))
        occ = derive_occupancy(fine, 1)
        assert occ.values[0, 0, 0] == 1.0  # 0.02 <= 1/32

    def test_all_children_far(self):
        fine = DenseField3D(2, np.full((2, 2, 2), 0.5, np.float32))
        assert derive_occupancy(fine, 1).values[0, 0, 0] == 0.0

    def test_single_near_child(self):
        v = np.full((2, 2, 2), 0.2, np.float32)
        v[1, 0, 1] = -0.031
        occ = derive_occupancy(DenseField3D(2, v), 1)
        assert occ.values[0, 0, 0] == 1.0

    def test_resolution_mismatch(self):
        with pytest.raises(ValueError, match="resolution-mismatch"):
            derive_occupancy(DenseField3D(4, np.zeros((4, 4, 4))), 3)

    def test_brute_force_oracle_random_fields(self, rng):
        for _ in range(100):
            values = rng.uniform(-0.2, 0.2, size=(8, 8, 8)).astype(np.float32)
            fine = DenseField3D(8, values)
            occ = derive_occupancy(fine, 4)
            expected = brute_force_occupancy(fine, 4)
            np.testing.assert_array_equal(occ.values, expected)

    def test_custom_threshold(self, sphere_field_32):
        occ = derive_occupancy(sphere_field_32, 16, threshold=shell_threshold_for(32))
        expected = brute_force_occupancy(sphere_field_32, 16, shell_threshold_for(32))
        np.testing.assert_array_equal(occ.values, expected)


class TestOccupancyFromSdf:
    def test_zero_field_all_ones(self):
        f = DenseField3D(4, np.zeros((4, 4, 4), np.float32))
        assert occupancy_from_sdf(f, 0.1).values.min() == 1.0

    def test_far_field_all_zeros(self):
        f = DenseField3D(4, np.full((4, 4, 4), 1.0, np.float32))
        assert occupancy_from_sdf(f, 0.1).values.max() == 0.0

    def test_invalid_threshold(self):
        f = DenseField3D(2, np.zeros((2, 2, 2)))
        with pytest.raises(ValueError, match="invalid-threshold"):
            occupancy_from_sdf(f, 0.0)

    def test_sphere_shell_matches_analytic_count(self):
        res = 32
        f = sphere_sdf_values(res, 0.5)
        h = 2.0 / res
        occ = occupancy_from_sdf(f, 2 * h)
        centers = cell_center_grid(res)
        analytic = np.abs(np.linalg.norm(centers, axis=-1) - 0.5) <= 2 * h
        np.testing.assert_array_equal(occ.values > 0.5, analytic)


class TestSubdivide:
    def test_single_cell_children(self):
        occ_values = np.zeros((4, 4, 4), np.float32)
        occ_values[1, 2, 3] = 1.0
        g = subdivide_occupied(DenseField3D(4, occ_values, kind="occupancy"))
        expected = {
            (2 + a, 4 + b, 6 + c) for a in (0, 1) for b in (0, 1) for c in (0, 1)
        }
        assert set(map(tuple, g.coords)) == expected
        assert g.resolution == 8
        assert (g.values == 0).all()

    def test_count_is_8x_parents(self, rng):
        for _ in range(20):
            occ = (rng.uniform(size=(8, 8, 8)) < 0.2).astype(np.float32)
            if not occ.any():
                occ[0, 0, 0] = 1.0
            g = subdivide_occupied(DenseField3D(8, occ, kind="occupancy"))
            assert len(g) == 8 * int(occ.sum())
            assert len(np.unique(g.coords, axis=0)) == len(g)

    def test_empty_shell_error(self):
        occ = DenseField3D(4, np.zeros((4, 4, 4), np.float32), kind="occupancy")
        with pytest.raises(ValueError, match="empty-shell"):
            subdivide_occupied(occ)

    def test_sphere_brute_force(self, sphere_field_32):
        occ = derive_occupancy(sphere_field_32, 16, threshold=shell_threshold_for(32))
        g = subdivide_occupied(occ)
        expected = set()
        for i, j, k in np.argwhere(occ.values > 0.5):
            for a in (0, 1):
                for b in (0, 1):
                    for c in (0, 1):
                        expected.add((2 * i + a, 2 * j + b, 2 * k + c))
        assert set(map(tuple, g.coords)) == expected


class TestRestrictToSparse:
    def test_zero_field(self, sphere_field_32):
        occ = derive_occupancy(sphere_field_32, 16, threshold=shell_threshold_for(32))
        g = subdivide_occupied(occ)
        zero = DenseField3D(32, np.zeros((32, 32, 32), np.float32))
        out = restrict_to_sparse(zero, g)
        assert (out.values == 0).all()

    def test_clamp_and_scale(self):
        res = 32
        h = 2.0 / res
        occ = np.zeros((16, 16, 16), np.float32)
        occ[0, 0, 0] = 1.0
        grid = subdivide_occupied(DenseField3D(16, occ, kind="occupancy"))
        values = np.zeros((res, res, res), np.float32)
        values[0, 0, 0] = 3 * h  # scales to exactly 1
        values[0, 0, 1] = -10 * h  # clamps to -1
        values[0, 1, 0] = 1.5 * h  # scales to 0.5
        out = restrict_to_sparse(DenseField3D(res, values), grid)
        lookup = {tuple(c): v for c, v in zip(out.coords, out.values)}
        assert lookup[(0, 0, 0)] == pytest.approx(1.0)
        assert lookup[(0, 0, 1)] == pytest.approx(-1.0)
        assert lookup[(0, 1, 0)] == pytest.approx(0.5)

    def test_denormalize_round_trip(self, sphere_field_32):
        occ = derive_occupancy(sphere_field_32, 16, threshold=shell_threshold_for(32))
        g = restrict_to_sparse(sphere_field_32, subdivide_occupied(occ))
        back = denormalize_sparse_sdf(g)
        band = 3 * (2.0 / 32)
        c = g.coords
        raw = np.clip(sphere_field_32.values[c[:, 0], c[:, 1], c[:, 2]], -band, band)
        np.testing.assert_allclose(back.values, raw, atol=1e-6)

    def test_resolution_mismatch(self, sphere_field_32):
        occ = np.zeros((8, 8, 8), np.float32)
        occ[0, 0, 0] = 1.0
        g = subdivide_occupied(DenseField3D(8, occ, kind="occupancy"))
        with pytest.raises(ValueError, match="resolution-mismatch"):
            restrict_to_sparse(sphere_field_32, g)


class TestUnionShapes:
    def test_self_union_identity(self, sphere_field_32):
        out = union_shapes(sphere_field_32, sphere_field_32, (0, 0, 0), (0, 0, 0))
        np.testing.assert_array_equal(out.values, sphere_field_32.values)

    def test_empty_identity_element(self, sphere_field_32):
        empty = DenseField3D(32, np.full((32, 32, 32), MAX_SDF, np.float32))
        out = union_shapes(sphere_field_32, empty, (0, 0, 0), (0, 0, 0))
        np.testing.assert_array_equal(out.values, sphere_field_32.values)

    def test_disjoint_spheres_analytic(self):
        res = 32
        a = sphere_sdf_values(res, 0.25, center=(-0.4, 0, 0))
        b = sphere_sdf_values(res, 0.25, center=(0.4, 0, 0))
        out = union_shapes(a, b, (0, 0, 0), (0, 0, 0))
        centers = cell_center_grid(res)
        da = np.linalg.norm(centers - [-0.4, 0, 0], axis=-1) - 0.25
        db = np.linalg.norm(centers - [0.4, 0, 0], axis=-1) - 0.25
        np.testing.assert_allclose(out.values, np.minimum(da, db), atol=1e-6)

    def test_translation_resamples(self):
        res = 32
        a = sphere_sdf_values(res, 0.3)
        empty = DenseField3D(res, np.full((res,) * 3, MAX_SDF, np.float32))
        t = (0.125, 0.0, 0.0)  # two cells exactly
        out = union_shapes(a, empty, t, (0, 0, 0))
        shifted = sphere_sdf_values(res, 0.3, center=t)
        inner = np.abs(shifted.values) < 0.5  # away from domain boundary effects
        np.testing.assert_allclose(
            out.values[inner], shifted.values[inner], atol=1e-5
        )

    def test_commutative(self, rng):
        a = DenseField3D(8, rng.uniform(-1, 1, (8, 8, 8)).astype(np.float32))
        b = DenseField3D(8, rng.uniform(-1, 1, (8, 8, 8)).astype(np.float32))
        ab = union_shapes(a, b, (0, 0, 0), (0, 0, 0))
        ba = union_shapes(b, a, (0, 0, 0), (0, 0, 0))
        np.testing.assert_array_equal(ab.values, ba.values)

    def test_associative_at_zero(self, rng):
        fields = [
            DenseField3D(8, rng.uniform(-1, 1, (8, 8, 8)).astype(np.float32))
            for _ in range(3)
        ]
        z = (0, 0, 0)
        left = union_shapes(union_shapes(fields[0], fields[1], z, z), fields[2], z, z)
        right = union_shapes(fields[0], union_shapes(fields[1], fields[2], z, z), z, z)
        np.testing.assert_array_equal(left.values, right.values)

    def test_out_of_domain_error(self, sphere_field_32):
        with pytest.raises(ValueError, match="out-of-domain"):
            union_shapes(sphere_field_32, sphere_field_32, (0.3, 0, 0), (0, 0, 0))


class TestFieldIO:
    def test_dense_round_trip(self, tmp_path, sphere_field_32):
        p = tmp_path / "f.lasf"
        write_field(sphere_field_32, p)
        back = read_field(p)
        assert isinstance(back, DenseField3D)
        assert back.kind == "sdf"
        assert back.resolution == 32
        np.testing.assert_array_equal(back.values, sphere_field_32.values)

    def test_occupancy_kind_round_trip(self, tmp_path):
        occ = DenseField3D(4, np.ones((4, 4, 4), np.float32), kind="occupancy")
        p = tmp_path / "o.lasf"
        write_field(occ, p)
        assert read_field(p).kind == "occupancy"

    def test_sparse_round_trip(self, tmp_path, sphere_field_32):
        occ = derive_occupancy(sphere_field_32, 16, threshold=shell_threshold_for(32))
        g = restrict_to_sparse(sphere_field_32, subdivide_occupied(occ))
        p = tmp_path / "s.lasf"
        write_field(g, p)
        back = read_field(p)
        assert isinstance(back, SparseVoxelGrid)
        np.testing.assert_array_equal(back.coords, g.coords)
        np.testing.assert_array_equal(back.values, g.values)

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "bad.lasf"
        p.write_bytes(b"NOPE" + b"\0" * 16)
        with pytest.raises(ValueError, match="bad-magic"):
            read_field(p)

    def test_header_layout(self, tmp_path):
        occ = DenseField3D(2, np.zeros((2, 2, 2), np.float32), kind="occupancy")
        p = tmp_path / "h.lasf"
        write_field(occ, p)
        raw = p.read_bytes()
        assert raw[:4] == b"LASF"
        assert raw[4:8] == (1).to_bytes(4, "little")  # version
        assert raw[8] == 1  # kind: dense occupancy
        assert raw[9:13] == (2).to_bytes(4, "little")  # resolution
        assert len(raw) == 13 + 8 * 4
