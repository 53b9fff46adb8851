"""Metric kernels against hand values, closed forms, and brute force."""

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from sketchsdf.fields import DenseField3D
from sketchsdf.metrics import (
    EvaluationReport,
    FIDAccumulator,
    StubEmbeddingModel,
    StubFeatureExtractor,
    chamfer,
    clip_score,
    cov_mmd_1nna,
    emd,
    emd_with_method,
    fibonacci_views,
    frechet_distance,
    nearest_retrieval,
    retrieval_histogram,
    sample_mesh_points,
    shading_fid,
    sketch_cd,
    voxel_iou,
)
from sketchsdf.mesh.primitives import (
    box_sdf_values,
    icosphere,
    sphere_sdf_values,
    torus_sdf_values,
)
from sketchsdf.mesh import marching_cubes_dual


class TestClipScore:
    def test_identical_images_100(self):
        model = StubEmbeddingModel()
        img = np.zeros((224, 224), np.uint8)
        img[40:80, 60:100] = 255
        assert clip_score(img, img, model) == pytest.approx(100.0, abs=1e-4)

    def test_orthogonal_embeddings_zero(self):
        class OneHot:
            def __init__(self):
                self.calls = 0

            def __call__(self, image):
                v = np.zeros(4)
                v[self.calls] = 1.0
                self.calls += 1
                return v

        img = np.zeros((8, 8))
        assert clip_score(img, img, OneHot()) == pytest.approx(0.0, abs=1e-12)

    def test_different_images_below_100(self):
        model = StubEmbeddingModel()
        a = np.zeros((224, 224), np.uint8)
        b = np.full((224, 224), 255, np.uint8)
        b[100:140, 100:140] = 0
        assert clip_score(a, b, model) < 100.0 - 1e-3


class TestSketchCd:
    def test_identical_zero(self):
        img = np.full((32, 32), 255, np.uint8)
        img[4:9, 7:15] = 0
        assert sketch_cd(img, img) == 0.0

    def test_hand_computed_half(self):
        i_img = np.full((10, 10), 255, np.uint8)
        g_img = np.full((10, 10), 255, np.uint8)
        i_img[0, 0] = 0  # normalized (0.0, 0.0)
        g_img[3, 4] = 0  # normalized (0.3, 0.4)
        assert sketch_cd(i_img, g_img) == pytest.approx(0.5, abs=1e-12)

    def test_containment_one_sided(self):
        i_img = np.full((20, 20), 255, np.uint8)
        g_img = np.full((20, 20), 255, np.uint8)
        i_img[5, 5] = 0
        g_img[5, 5] = 0
        g_img[10, 10] = 0
        d = sketch_cd(i_img, g_img)
        # I -> G term is 0; total equals the G -> I term.
        gi = ((10 - 5) / 20) ** 2 * 2 / 2  # mean over G's two points
        assert d == pytest.approx(gi, abs=1e-12)

    def test_empty_sketch_error(self):
        blank = np.full((16, 16), 255, np.uint8)
        inked = blank.copy()
        inked[3, 3] = 0
        with pytest.raises(ValueError, match="empty-sketch"):
            sketch_cd(blank, inked)


class TestPointSetMetrics:
    def test_identical_sets_zero(self, rng):
        p = rng.standard_normal((64, 3))
        assert chamfer(p, p.copy()) == 0.0
        assert emd(p, rng.permutation(p)) == pytest.approx(0.0, abs=1e-9)

    def test_hand_example(self):
        p = np.array([[0.0], [1.0]])
        q = np.array([[0.5], [1.5]])
        assert chamfer(p, q) == pytest.approx(0.5, abs=1e-12)
        assert emd(p, q) == pytest.approx(0.5, abs=1e-12)

    def test_symmetry_nonnegativity(self, rng):
        for _ in range(5):
            p = rng.standard_normal((20, 3))
            q = rng.standard_normal((20, 3))
            assert chamfer(p, q) == pytest.approx(chamfer(q, p), rel=1e-12)
            assert emd(p, q) == pytest.approx(emd(q, p), rel=1e-9)
            assert chamfer(p, q) >= 0 and emd(p, q) >= 0

    def test_emd_size_mismatch(self):
        with pytest.raises(ValueError, match="size-mismatch"):
            emd(np.zeros((3, 2)), np.zeros((4, 2)))

    def test_emd_exact_below_limit(self, rng):
        p = rng.standard_normal((100, 3))
        q = rng.standard_normal((100, 3))
        _, method = emd_with_method(p, q)
        assert method == "hungarian-exact"

    def test_emd_approx_matches_hungarian(self, rng):
        for n in (16, 32, 64):
            p = rng.standard_normal((n, 3))
            q = rng.standard_normal((n, 3))
            cost = np.linalg.norm(p[:, None] - q[None], axis=-1)
            r, c = linear_sum_assignment(cost)
            exact = cost[r, c].mean()
            from sketchsdf.metrics.pointsets import _auction_assignment

            cols = _auction_assignment(cost)
            assert sorted(cols.tolist()) == list(range(n))  # a real matching
            approx = cost[np.arange(n), cols].mean()
            assert approx <= exact * 1.02 + 1e-12

    def test_emd_approx_above_limit(self, rng):
        p = rng.standard_normal((300, 3))
        q = rng.standard_normal((300, 3))
        val, method = emd_with_method(p, q)
        assert method == "auction-approximate"
        cost = np.linalg.norm(p[:, None] - q[None], axis=-1)
        r, c = linear_sum_assignment(cost)
        exact = cost[r, c].mean()
        assert val <= exact * 1.02


class TestVoxelIou:
    def _occ(self, mask):
        return DenseField3D(mask.shape[0], mask.astype(np.float32), kind="occupancy")

    def test_equal_nonempty_one(self, rng):
        m = rng.uniform(size=(8, 8, 8)) < 0.3
        m[0, 0, 0] = True
        assert voxel_iou(self._occ(m), self._occ(m.copy())) == 1.0

    def test_disjoint_zero(self):
        a = np.zeros((4, 4, 4))
        b = np.zeros((4, 4, 4))
        a[0, 0, 0] = 1
        b[3, 3, 3] = 1
        assert voxel_iou(self._occ(a), self._occ(b)) == 0.0

    def test_empty_union_error(self):
        z = np.zeros((4, 4, 4))
        with pytest.raises(ValueError, match="empty-union"):
            voxel_iou(self._occ(z), self._occ(z.copy()))

    def test_monotone_under_growth(self, rng):
        a = rng.uniform(size=(8, 8, 8)) < 0.3
        b = a & (rng.uniform(size=(8, 8, 8)) < 0.7)
        b_grown = b | a
        if b.any():
            assert voxel_iou(self._occ(a), self._occ(b_grown)) >= voxel_iou(
                self._occ(a), self._occ(b)
            )

    def test_range(self, rng):
        a = rng.uniform(size=(8, 8, 8)) < 0.4
        b = rng.uniform(size=(8, 8, 8)) < 0.4
        a[0, 0, 0] = True
        v = voxel_iou(self._occ(a), self._occ(b))
        assert 0.0 <= v <= 1.0


class TestFrechet:
    def test_identical_sets_zero(self, rng):
        feats = rng.standard_normal((500, 8))
        assert frechet_distance(feats, feats.copy()) == pytest.approx(0.0, abs=1e-3)

    def test_gaussian_closed_form(self):
        rng = np.random.default_rng(0)
        d = 16
        mu2 = np.full(d, 0.5)
        a = rng.standard_normal((2000, d))
        b = rng.standard_normal((2000, d)) + mu2
        expected = float(mu2 @ mu2)
        assert frechet_distance(a, b) == pytest.approx(expected, rel=0.05)

    def test_symmetric(self, rng):
        a = rng.standard_normal((300, 6))
        b = rng.standard_normal((300, 6)) + 0.3
        assert abs(frechet_distance(a, b) - frechet_distance(b, a)) <= 1e-6

    def test_ridge_warning_on_singular(self, rng):
        a = np.zeros((10, 4))  # rank-0 covariance
        b = rng.standard_normal((10, 4))
        with pytest.warns(RuntimeWarning, match="ill-conditioned"):
            frechet_distance(a, b)

    def test_accumulator_requires_two(self):
        acc = FIDAccumulator(num_views=1)
        acc.add(0, "gen", np.zeros(4))
        acc.add(0, "ref", np.zeros(4))
        with pytest.raises(ValueError, match="view 0 short"):
            acc.result()


class TestShadingFid:
    @pytest.fixture(scope="class")
    def meshes(self):
        return [
            marching_cubes_dual(sphere_sdf_values(24, 0.5)),
            marching_cubes_dual(box_sdf_values(24, (0.4, 0.35, 0.3))),
            marching_cubes_dual(torus_sdf_values(24, 0.5, 0.2)),
        ]

    def test_fibonacci_views_fixed(self):
        a = fibonacci_views()
        b = fibonacci_views()
        assert len(a) == 20
        assert all(x.azimuth == y.azimuth and x.elevation == y.elevation
                   for x, y in zip(a, b))

    def test_self_fid_near_zero(self, meshes):
        extractor = StubFeatureExtractor(dim=8)
        fid = shading_fid(meshes, [m.copy() for m in meshes], extractor)
        assert fid == pytest.approx(0.0, abs=1e-3)

    def test_mesh_order_invariance(self, meshes):
        extractor = StubFeatureExtractor(dim=8)
        a = shading_fid(meshes, meshes[::-1], extractor)
        b = shading_fid(meshes[::-1], meshes, extractor)
        assert a == pytest.approx(b, abs=1e-6)

    def test_distinct_sets_positive(self, meshes):
        extractor = StubFeatureExtractor(dim=8)
        spheres = [
            marching_cubes_dual(sphere_sdf_values(24, r)) for r in (0.3, 0.35, 0.4)
        ]
        fid = shading_fid(spheres, meshes, extractor)
        assert fid > 0.01

    def test_min_meshes(self, meshes):
        with pytest.raises(ValueError, match="at least 2"):
            shading_fid(meshes[:1], meshes, StubFeatureExtractor())


class TestCovMmd1nna:
    def _clusters(self, rng, offset):
        base = rng.standard_normal((6, 32, 3)) * 0.05
        return [b + offset for b in base]

    def test_gen_equals_ref(self, rng):
        sets = [rng.standard_normal((32, 3)) for _ in range(5)]
        cov, mmd, _ = cov_mmd_1nna(sets, [s.copy() for s in sets])
        assert cov == 100.0
        assert mmd == pytest.approx(0.0, abs=1e-12)

    def test_separated_clusters_full_1nna(self, rng):
        gen = self._clusters(rng, 0.0)
        ref = self._clusters(rng, 10.0)
        _, _, nna = cov_mmd_1nna(gen, ref)
        assert nna == 100.0

    def test_duplicated_gen_covers_one(self, rng):
        ref = [rng.standard_normal((16, 3)) + i * 5 for i in range(4)]
        single = rng.standard_normal((16, 3))
        gen = [single.copy() for _ in range(4)]
        cov, _, _ = cov_mmd_1nna(gen, ref)
        assert cov == pytest.approx(100.0 / len(ref))

    def test_emd_base(self, rng):
        sets = [rng.standard_normal((16, 3)) for _ in range(3)]
        cov, mmd, nna = cov_mmd_1nna(sets, [s.copy() for s in sets], base_metric="EMD")
        assert cov == 100.0 and mmd == pytest.approx(0.0, abs=1e-9)

    def test_empty_side_error(self):
        with pytest.raises(ValueError, match="empty-side"):
            cov_mmd_1nna([], [np.zeros((4, 3))])


class TestRetrieval:
    @pytest.fixture(scope="class")
    def train(self):
        return [
            marching_cubes_dual(sphere_sdf_values(20, 0.5)),
            marching_cubes_dual(box_sdf_values(20, (0.4, 0.4, 0.4))),
            marching_cubes_dual(torus_sdf_values(20, 0.5, 0.2)),
        ]

    def test_query_in_train_first_zero(self, train):
        out = nearest_retrieval(train[1], train, k=2)
        assert out[0][0] == 1
        assert out[0][1] == pytest.approx(0.0, abs=1e-12)

    def test_full_ordering_monotone(self, train):
        out = nearest_retrieval(train[0], train, k=3)
        dists = [d for _, d in out]
        assert dists == sorted(dists)

    def test_sphere_query_ranks_sphere_first(self, train):
        query = marching_cubes_dual(sphere_sdf_values(24, 0.48))
        out = nearest_retrieval(query, train, k=3)
        assert out[0][0] == 0

    def test_k_too_large(self, train):
        with pytest.raises(ValueError, match="exceeds"):
            nearest_retrieval(train[0], train, k=4)

    def test_histogram_counts_sum(self, train):
        gen = [marching_cubes_dual(sphere_sdf_values(20, r)) for r in (0.3, 0.45)]
        counts, edges, nearest = retrieval_histogram(gen, train, bins=5)
        assert sum(counts) == len(gen)
        assert len(edges) == 6


class TestSampleMeshPoints:
    def test_fixed_seed_reproducible(self):
        mesh = icosphere(0.5, 2)
        a = sample_mesh_points(mesh, 256, seed=3)
        b = sample_mesh_points(mesh, 256, seed=3)
        np.testing.assert_array_equal(a, b)

    def test_points_on_sphere_surface(self):
        mesh = icosphere(0.5, 3)
        pts = sample_mesh_points(mesh, 2048, seed=0)
        r = np.linalg.norm(pts, axis=1)
        assert np.abs(r - 0.5).max() < 0.01  # inscribed facets

    def test_area_weighting(self, rng):
        # Two triangles, one 100x larger: samples follow area.
        from sketchsdf.fields.types import TriangleMesh

        mesh = TriangleMesh(
            np.array([
                [0, 0, 0], [1, 0, 0], [0, 1, 0],
                [10, 0, 0], [20, 0, 0], [10, 10, 0],
            ], dtype=float),
            np.array([[0, 1, 2], [3, 4, 5]]),
        )
        pts = sample_mesh_points(mesh, 4000, seed=1)
        big = (pts[:, 0] >= 10).sum()
        assert big / 4000 == pytest.approx(100 / 101, abs=0.02)


class TestReport:
    def test_json_round_trip(self, tmp_path):
        rep = EvaluationReport(protocol="sketch")
        rep.add("clip_score", 96.92, extractor_id="stub")
        rep.add("sketch_cd", 0.5)
        p = tmp_path / "r.json"
        rep.write_json(p)
        back = EvaluationReport.from_json(p)
        assert back.protocol == "sketch"
        assert back.entries[0].metric == "clip_score"
        assert back.entries[0].value == pytest.approx(96.92)

    def test_csv_export(self, tmp_path):
        rep = EvaluationReport(protocol="category")
        rep.add("shading_fid", 1.25, extractor_id="stub-x")
        p = tmp_path / "r.csv"
        rep.write_csv(p)
        lines = p.read_text().strip().splitlines()
        assert lines[0].startswith("metric,")
        assert lines[1].startswith("shading_fid,1.25")

    def test_convention_fingerprint_present(self):
        rep = EvaluationReport(protocol="sketch")
        rep.add("cd", 1.0)
        d = rep.to_dict()
        assert "cd=sum-mean-sq" in d["metrics"][0]["convention"]
