"""Shading-image Frechet distance averaged over 20 fixed views.

Each mesh is rendered from 20 Fibonacci-sphere directions; image features
go through a pluggable extractor (desk scale: a fixed-seed projection
stub). Scores are only comparable under the same extractor, so reports
embed its fingerprint.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np

from ..dataprep.render import render_shading
from ..fields.types import TriangleMesh
from ..view_attention.cameras import CameraView

NUM_VIEWS = 20
RIDGE = 1e-6


def fibonacci_views(
    count: int = NUM_VIEWS, distance: float = 2.5, fov_y: float = 45.0,
    image_size: int = 224,
) -> List[CameraView]:
    """Deterministic, roughly uniform camera directions on the sphere."""
    golden = math.pi * (3.0 - math.sqrt(5.0))
    views = []
    for i in range(count):
        y = 1.0 - 2.0 * (i + 0.5) / count
        elevation = math.degrees(math.asin(y))
        azimuth = math.degrees((i * golden) % (2 * math.pi))
        views.append(
            CameraView(azimuth, elevation, distance, fov_y, image_size,
                       name=f"fib{i}")
        )
    return views


class StubFeatureExtractor:
    """Fixed-seed linear-ReLU projection of 8x8-block-averaged pixels."""

    def __init__(self, dim: int = 16, seed: int = 0, image_size: int = 224):
        self.dim = dim
        self.seed = seed
        self.image_size = image_size
        self.block = 8
        side = image_size // self.block
        rng = np.random.default_rng(seed)
        self._w = rng.standard_normal((side * side, dim)) / math.sqrt(side * side)
        self.fingerprint = f"stub-blockproj-d{dim}-seed{seed}"

    def __call__(self, image: np.ndarray) -> np.ndarray:
        img = np.asarray(image, dtype=np.float64) / 255.0
        s = self.block
        side = img.shape[0] // s
        blocks = img.reshape(side, s, side, s).mean(axis=(1, 3)).reshape(-1)
        return np.maximum(blocks @ self._w, 0.0)


def frechet_distance(feats_a: np.ndarray, feats_b: np.ndarray) -> float:
    """||mu_a - mu_b||^2 + Tr(Sa + Sb - 2 (Sa Sb)^(1/2)).

    The matrix square root comes from the eigendecomposition of the
    symmetrized product sqrt(Sa) Sb sqrt(Sa), negative eigenvalues clipped
    at zero; ill-conditioned covariances get a 1e-6 ridge with a warning.
    """
    feats_a = np.asarray(feats_a, dtype=np.float64)
    feats_b = np.asarray(feats_b, dtype=np.float64)
    if len(feats_a) < 2 or len(feats_b) < 2:
        raise ValueError("need at least 2 samples per side")
    mu_a = feats_a.mean(axis=0)
    mu_b = feats_b.mean(axis=0)
    cov_a = np.cov(feats_a, rowvar=False)
    cov_b = np.cov(feats_b, rowvar=False)
    cov_a = np.atleast_2d(cov_a)
    cov_b = np.atleast_2d(cov_b)

    min_eig = min(np.linalg.eigvalsh(cov_a).min(), np.linalg.eigvalsh(cov_b).min())
    if min_eig < 1e-10:
        warnings.warn(
            f"ill-conditioned covariance (min eig {min_eig:.2e}); adding ridge {RIDGE}",
            RuntimeWarning,
            stacklevel=2,
        )
        eye = np.eye(cov_a.shape[0])
        cov_a = cov_a + RIDGE * eye
        cov_b = cov_b + RIDGE * eye

    # sqrt(cov_a) via eigendecomposition (symmetric PSD).
    w, v = np.linalg.eigh(cov_a)
    root_a = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T
    m = root_a @ cov_b @ root_a
    m = (m + m.T) / 2.0
    w2 = np.linalg.eigvalsh(m)
    tr_sqrt = np.sqrt(np.clip(w2, 0.0, None)).sum()

    diff = mu_a - mu_b
    return float(diff @ diff + np.trace(cov_a) + np.trace(cov_b) - 2.0 * tr_sqrt)


@dataclass
class FIDAccumulator:
    """Per-view feature pools for the generated and reference sides."""

    num_views: int = NUM_VIEWS
    gen: Dict[int, List[np.ndarray]] = field(default_factory=dict)
    ref: Dict[int, List[np.ndarray]] = field(default_factory=dict)

    def add(self, view_index: int, side: str, features: np.ndarray) -> None:
        pool = self.gen if side == "gen" else self.ref
        pool.setdefault(view_index, []).append(np.asarray(features, dtype=np.float64))

    def result(self) -> float:
        total = 0.0
        for i in range(self.num_views):
            if len(self.gen.get(i, ())) < 2 or len(self.ref.get(i, ())) < 2:
                raise ValueError(f"need >=2 samples per view, view {i} short")
            total += frechet_distance(np.stack(self.gen[i]), np.stack(self.ref[i]))
        return total / self.num_views


def shading_fid(
    gen_meshes: Sequence[TriangleMesh],
    ref_meshes: Sequence[TriangleMesh],
    extractor,
    views: Sequence[CameraView] | None = None,
) -> float:
    """Average per-view Frechet distance over renders of both mesh sets."""
    if len(gen_meshes) < 2 or len(ref_meshes) < 2:
        raise ValueError("need at least 2 meshes per side")
    views = fibonacci_views() if views is None else list(views)
    acc = FIDAccumulator(num_views=len(views))
    for side, meshes in (("gen", gen_meshes), ("ref", ref_meshes)):
        for mesh in meshes:
            for i, view in enumerate(views):
                acc.add(i, side, extractor(render_shading(mesh, view)))
    return acc.result()
