"""Sketch-level metrics: embedding similarity score and 2D stroke Chamfer."""

from __future__ import annotations

import math
from typing import Protocol

import numpy as np
from scipy.spatial import cKDTree


class EmbeddingModel(Protocol):
    """Opaque deterministic image-to-vector function."""

    def __call__(self, image: np.ndarray) -> np.ndarray: ...


class StubEmbeddingModel:
    """Fixed-seed projection embedding standing in for a frozen CLIP image tower."""

    def __init__(self, dim: int = 64, seed: int = 0, image_size: int = 224):
        self.dim = dim
        self.block = 8
        side = image_size // self.block
        rng = np.random.default_rng(seed)
        self._w = rng.standard_normal((side * side, dim)) / math.sqrt(side * side)
        self._b = 0.05 * rng.standard_normal(dim)
        self.fingerprint = f"stub-embed-d{dim}-seed{seed}"

    def __call__(self, image: np.ndarray) -> np.ndarray:
        img = np.asarray(image, dtype=np.float64)
        if img.max() > 1.5:
            img = img / 255.0
        s = self.block
        side = img.shape[0] // s
        blocks = img.reshape(side, s, side, s).mean(axis=(1, 3)).reshape(-1)
        return np.tanh(blocks @ self._w + self._b)


def clip_score(sketch_in: np.ndarray, sketch_gen: np.ndarray, model: EmbeddingModel) -> float:
    """100 x cosine similarity of the two sketch embeddings."""
    e_i = np.asarray(model(sketch_in), dtype=np.float64)
    e_g = np.asarray(model(sketch_gen), dtype=np.float64)
    e_i = e_i / np.linalg.norm(e_i)
    e_g = e_g / np.linalg.norm(e_g)
    return float(100.0 * (e_i @ e_g))


def sketch_cd(i_img: np.ndarray, g_img: np.ndarray) -> float:
    """Symmetric 2D Chamfer over non-white pixels.

    Pixel coordinates are normalized to [0,1]; each direction contributes
    the mean of minimum squared distances; the result is their sum.
    """
    i_img = np.asarray(i_img)
    g_img = np.asarray(g_img)
    if i_img.shape != g_img.shape:
        raise ValueError(f"size-mismatch: {i_img.shape} vs {g_img.shape}")
    pts_i = np.argwhere(i_img < 255).astype(np.float64)
    pts_g = np.argwhere(g_img < 255).astype(np.float64)
    if len(pts_i) == 0 or len(pts_g) == 0:
        raise ValueError("empty-sketch")
    scale = float(i_img.shape[0])
    pts_i /= scale
    pts_g /= scale
    d_ig, _ = cKDTree(pts_g).query(pts_i, k=1)
    d_gi, _ = cKDTree(pts_i).query(pts_g, k=1)
    return float((d_ig**2).mean() + (d_gi**2).mean())
