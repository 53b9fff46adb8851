"""Cameras, masks, cross-attention, patch encoder, stitching."""

import math

import numpy as np
import pytest
import torch

from sketchsdf.view_attention import (
    CameraView,
    LocalCrossAttention,
    PatchGrid,
    StubPatchEncoder,
    build_attention_mask,
    encode_sketch,
    half_region,
    patch_centers,
    patch_position_encoding,
    predefined_views,
    project_points,
    project_voxel_centers,
    stitch_patch_features,
    view_by_name,
    voxel_position_encoding,
)


class TestPredefinedViews:
    def test_five_distinct_azimuths(self):
        views = predefined_views()
        assert len(views) == 5
        azimuths = [v.azimuth for v in views]
        assert len(set(azimuths)) == 5
        assert azimuths == [-90.0, -45.0, 0.0, 45.0, 90.0]

    def test_front_zero_azimuth(self):
        assert view_by_name("front").azimuth == 0.0

    def test_left_right_mirror(self):
        assert view_by_name("left").azimuth == -view_by_name("right").azimuth
        assert view_by_name("side-left").azimuth == -view_by_name("side-right").azimuth

    def test_distance_outside_bounding_sphere(self):
        for v in predefined_views():
            assert v.distance > 0.8 * math.sqrt(3.0)

    def test_unknown_view_name(self):
        with pytest.raises(KeyError, match="unknown-view"):
            view_by_name("top")


class TestProjection:
    def test_origin_to_principal_point(self):
        for v in predefined_views():
            coords, valid = project_points(np.zeros((1, 3)), v)
            assert valid[0]
            np.testing.assert_allclose(coords[0], [112.0, 112.0], atol=1e-6)

    def test_vertical_symmetry_plane(self):
        # Points in the camera's vertical symmetry plane project to x = 112.
        v = view_by_name("front")  # looks along -z; plane x = 0
        pts = np.array([[0.0, y, z] for y in (-0.5, 0, 0.4) for z in (-0.5, 0.3)])
        coords, _ = project_points(pts, v)
        np.testing.assert_allclose(coords[:, 0], 112.0, atol=1e-6)

    def test_hand_computed_pinhole(self):
        v = CameraView(azimuth=0.0, elevation=0.0, distance=2.5, fov_y=45.0)
        coords, valid = project_points(np.array([[0.4, 0.0, 0.0]]), v)
        f = 112.0 / math.tan(math.radians(22.5))
        expected_x = 112.0 + f * 0.4 / 2.5
        assert valid[0]
        np.testing.assert_allclose(coords[0], [expected_x, 112.0], atol=1e-4)

    def test_behind_camera_invalid(self):
        v = CameraView(azimuth=0.0, elevation=0.0, distance=2.5, fov_y=45.0)
        _, valid = project_points(np.array([[0.0, 0.0, 5.0]]), v)
        assert not valid[0]

    def test_voxel_centers_count_and_validity(self):
        coords, valid = project_voxel_centers(8, view_by_name("side-left"))
        assert coords.shape == (512, 2)
        assert valid.all()  # whole domain is in front of every predefined view

    def test_mirror_symmetry_about_principal_point(self, rng):
        v = view_by_name("side-right")
        mirrored = CameraView(-v.azimuth, v.elevation, v.distance, v.fov_y,
                              v.image_size)
        pts = rng.uniform(-0.8, 0.8, size=(50, 3))
        reflected = pts * np.array([-1.0, 1.0, 1.0])
        c1, _ = project_points(pts, v)
        c2, _ = project_points(reflected, mirrored)
        np.testing.assert_allclose(c2[:, 0] - 112.0, -(c1[:, 0] - 112.0), atol=1e-6)
        np.testing.assert_allclose(c2[:, 1], c1[:, 1], atol=1e-6)

    def test_invalid_resolution(self):
        with pytest.raises(ValueError, match="invalid-resolution"):
            project_voxel_centers(0, view_by_name("front"))


def _zero_patches(n_feat=8):
    return PatchGrid(
        patch_width=14,
        features=np.zeros((256, n_feat), np.float32),
        centers=patch_centers(224, 14),
    )


class TestAttentionMask:
    def test_infinite_radius_all_true(self):
        projected = np.array([[50.0, 80.0], [112.0, 112.0]])
        diag = math.hypot(224, 224)
        mask = build_attention_mask(projected, _zero_patches(), diag)
        assert mask.all()

    def test_brute_force_disk(self):
        projected = np.array([[112.0, 112.0]])
        mask = build_attention_mask(projected, _zero_patches(), 56.0)
        centers = patch_centers(224, 14)
        expected = np.linalg.norm(centers - [112, 112], axis=1) < 56.0
        np.testing.assert_array_equal(mask[0], expected)

    def test_brute_force_random_projections(self, rng):
        centers = patch_centers(224, 14)
        patches = _zero_patches()
        projected = rng.uniform(-300, 500, size=(1000, 2))
        d = 56.0
        mask = build_attention_mask(projected, patches, d)
        expected = (
            np.linalg.norm(projected[:, None] - centers[None], axis=-1) < d
        )
        np.testing.assert_array_equal(mask, expected)

    def test_far_outside_all_false(self):
        mask = build_attention_mask(np.array([[-500.0, -500.0]]), _zero_patches(), 56.0)
        assert not mask.any()

    def test_invalid_projection_row_false(self):
        projected = np.array([[112.0, 112.0], [112.0, 112.0]])
        mask = build_attention_mask(
            projected, _zero_patches(), 56.0, valid=np.array([True, False])
        )
        assert mask[0].any() and not mask[1].any()

    def test_mask_stability_under_small_view_error(self, rng):
        # If every projection moves < m pixels, only patches whose center
        # distance lies in [d - m, d + m] may change membership.
        centers = patch_centers(224, 14)
        patches = _zero_patches()
        d, m = 56.0, 3.0
        projected = rng.uniform(0, 224, size=(200, 2))
        moved = projected + rng.uniform(-m / math.sqrt(2), m / math.sqrt(2),
                                        size=projected.shape)
        mask_a = build_attention_mask(projected, patches, d)
        mask_b = build_attention_mask(moved, patches, d)
        dist = np.linalg.norm(projected[:, None] - centers[None], axis=-1)
        can_change = (dist >= d - m) & (dist <= d + m)
        changed = mask_a != mask_b
        assert not (changed & ~can_change).any()


class TestLocalCrossAttention:
    def _setup(self, n=6, p=10, c=16, d=12, heads=4, seed=0):
        torch.manual_seed(seed)
        layer = LocalCrossAttention(c, d, heads=heads)
        vox = torch.randn(n, c)
        patches = torch.randn(p, d)
        vox_pos = torch.randn(n, 3 * layer.pos_dim_per_axis)
        patch_pos = torch.randn(p, 2 * layer.pos_dim_per_axis)
        return layer, vox, patches, vox_pos, patch_pos

    def test_empty_row_passthrough(self):
        layer, vox, patches, vp, pp = self._setup()
        mask = torch.zeros(6, 10, dtype=torch.bool)
        mask[1:] = True
        out = layer(vox, patches, mask, vp, pp)
        assert torch.equal(out[0], vox[0])
        assert not torch.equal(out[1], vox[1])

    def test_single_true_row_is_v_projection(self):
        layer, vox, patches, vp, pp = self._setup(heads=1)
        mask = torch.zeros(6, 10, dtype=torch.bool)
        mask[2, 7] = True
        out = layer(vox, patches, mask, vp, pp)
        kv_in = patches + layer.patch_pos_proj(pp)
        expected = vox[2] + layer.w_v(kv_in)[7]
        assert torch.allclose(out[2], expected, atol=1e-6)

    def test_single_true_row_multi_head(self):
        layer, vox, patches, vp, pp = self._setup(heads=4)
        mask = torch.zeros(6, 10, dtype=torch.bool)
        mask[3, 1] = True
        out = layer(vox, patches, mask, vp, pp)
        kv_in = patches + layer.patch_pos_proj(pp)
        expected = vox[3] + layer.w_v(kv_in)[1]
        assert torch.allclose(out[3], expected, atol=1e-6)

    def test_masked_patch_perturbation_bit_identical(self):
        layer, vox, patches, vp, pp = self._setup()
        mask = torch.zeros(6, 10, dtype=torch.bool)
        mask[:, :4] = True  # patches 4..9 masked everywhere
        out1 = layer(vox, patches, mask, vp, pp)
        patches2 = patches.clone()
        patches2[5] = 1e6
        patches2[9] = -123.0
        out2 = layer(vox, patches2, mask, vp, pp)
        assert torch.equal(out1, out2)

    @torch.no_grad()
    def test_rows_are_convex_combinations(self):
        layer, vox, patches, vp, pp = self._setup()
        mask = torch.rand(6, 10) > 0.4
        q_in = vox + layer.voxel_pos_proj(vp)
        kv_in = patches + layer.patch_pos_proj(pp)
        q = layer.w_q(q_in).view(6, 4, -1)
        k = layer.w_k(kv_in).view(10, 4, -1)
        logits = torch.einsum("nhd,phd->nhp", q, k) / math.sqrt(layer.head_dim)
        logits = logits.masked_fill(~mask[:, None, :], torch.finfo(torch.float32).min)
        weights = torch.softmax(logits, dim=-1)
        for i in range(6):
            if not mask[i].any():
                continue
            for h in range(4):
                w = weights[i, h]
                assert (w >= 0).all()
                assert float(w.sum()) == pytest.approx(1.0, abs=1e-5)
                assert float(w[~mask[i]].abs().sum()) == 0.0

    def test_all_true_equals_view_agnostic_bitwise(self):
        layer, vox, patches, vp, pp = self._setup()
        diag_mask = build_attention_mask(
            np.tile([112.0, 112.0], (6, 1)), _zero_patches(), 10_000.0
        )[:, :10]
        assert diag_mask.all()
        out_a = layer(vox, patches, torch.from_numpy(diag_mask), vp, pp)
        out_b = layer(vox, patches, torch.ones(6, 10, dtype=torch.bool), vp, pp)
        assert torch.equal(out_a, out_b)


class TestPositionalEncodings:
    def test_voxel_encoding_shape(self):
        enc = voxel_position_encoding(4, 16)
        assert enc.shape == (64, 48)

    def test_patch_encoding_shape(self):
        enc = patch_position_encoding(16, 16)
        assert enc.shape == (256, 32)

    def test_distinct_positions_distinct_encodings(self):
        enc = voxel_position_encoding(4, 16)
        assert len(np.unique(enc.round(6), axis=0)) == 64


class TestEncoder:
    def test_deterministic(self):
        enc = StubPatchEncoder()
        img = np.zeros((224, 224), np.float32)
        img[50:100, 80:130] = 1.0
        a = encode_sketch(img, enc)
        b = encode_sketch(img, enc)
        np.testing.assert_array_equal(a.features, b.features)
        np.testing.assert_array_equal(a.global_token, b.global_token)

    def test_patch_count_256(self):
        enc = StubPatchEncoder()
        grid = encode_sketch(np.zeros((224, 224), np.float32), enc)
        assert grid.num_patches == (224 // 14) ** 2 == 256

    def test_global_tokens_differ(self):
        enc = StubPatchEncoder()
        white = np.ones((224, 224), np.float32)
        sketch = np.ones((224, 224), np.float32)
        sketch[100:120, :] = 0.0
        ga = encode_sketch(white, enc).global_token
        gb = encode_sketch(sketch, enc).global_token
        assert np.abs(ga - gb).max() > 1e-4

    def test_wrong_size_error(self):
        enc = StubPatchEncoder()
        with pytest.raises(ValueError, match="image-size-mismatch"):
            encode_sketch(np.zeros((100, 100), np.float32), enc)

    def test_patch_feature_locality(self):
        # Changing pixels inside one patch only changes that patch's feature.
        enc = StubPatchEncoder()
        img = np.zeros((224, 224), np.float32)
        a = enc(img)
        img2 = img.copy()
        img2[0:14, 14:28] = 1.0  # patch (row 0, col 1) -> index 1
        b = enc(img2)
        diff = np.abs(a.features - b.features).max(axis=1)
        assert diff[1] > 0
        assert (diff[np.arange(256) != 1] == 0).all()


class TestStitch:
    def _grids(self):
        enc = StubPatchEncoder()
        img_a = np.zeros((224, 224), np.float32)
        img_b = np.ones((224, 224), np.float32)
        return enc(img_a), enc(img_b)

    def test_all_false_is_a(self):
        a, b = self._grids()
        out = stitch_patch_features(a, b, np.zeros(256, bool))
        np.testing.assert_array_equal(out.features, a.features)

    def test_all_true_is_b(self):
        a, b = self._grids()
        out = stitch_patch_features(a, b, np.ones(256, bool))
        np.testing.assert_array_equal(out.features, b.features)

    def test_top_half_rows(self):
        a, b = self._grids()
        region = half_region(16, 16, "top")
        out = stitch_patch_features(a, b, region)
        np.testing.assert_array_equal(out.features[: 8 * 16], b.features[: 8 * 16])
        np.testing.assert_array_equal(out.features[8 * 16 :], a.features[8 * 16 :])
        np.testing.assert_array_equal(out.centers, a.centers)

    def test_geometry_mismatch(self):
        a, _ = self._grids()
        small = PatchGrid(
            patch_width=14,
            features=np.zeros((4, a.features.shape[1]), np.float32),
            centers=np.zeros((4, 2)),
            image_size=28,
        )
        with pytest.raises(ValueError, match="geometry-mismatch"):
            stitch_patch_features(a, small, np.zeros(4, bool))
