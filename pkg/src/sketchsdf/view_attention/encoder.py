"""Pluggable frozen patch encoders.

Production use plugs in a frozen pretrained ViT through the PatchEncoder
protocol; the desk-scale default is a small fixed-seed random patch
embedder so the full data path runs without large-model weights.
"""

from __future__ import annotations

from typing import Protocol

import numpy as np

from .masks import PatchGrid, patch_centers


class PatchEncoder(Protocol):
    image_size: int
    patch_width: int
    feature_dim: int

    def __call__(self, image: np.ndarray) -> PatchGrid: ...


class StubPatchEncoder:
    """Frozen random patch embedder: per-patch tanh projection of raw pixels.

    Deterministic for a given seed; weights never train.
    """

    def __init__(
        self,
        feature_dim: int = 32,
        image_size: int = 224,
        patch_width: int = 14,
        seed: int = 0,
    ):
        self.image_size = image_size
        self.patch_width = patch_width
        self.feature_dim = feature_dim
        self.seed = seed
        rng = np.random.default_rng(seed)
        pix = patch_width * patch_width
        self._w = rng.standard_normal((pix, feature_dim)).astype(np.float32) / np.sqrt(pix)
        self._b = 0.1 * rng.standard_normal(feature_dim).astype(np.float32)
        self._wg = rng.standard_normal((feature_dim, feature_dim)).astype(np.float32) / np.sqrt(
            feature_dim
        )
        self._bg = 0.1 * rng.standard_normal(feature_dim).astype(np.float32)

    def __call__(self, image: np.ndarray) -> PatchGrid:
        image = np.asarray(image, dtype=np.float32)
        if image.shape != (self.image_size, self.image_size):
            raise ValueError(
                f"image-size-mismatch: {image.shape} != "
                f"({self.image_size}, {self.image_size})"
            )
        g = self.image_size // self.patch_width
        pw = self.patch_width
        # (rows, cols, pw*pw) patch pixel blocks, row-major patch order.
        blocks = (
            image.reshape(g, pw, g, pw).transpose(0, 2, 1, 3).reshape(g * g, pw * pw)
        )
        feats = np.tanh(blocks @ self._w + self._b)
        global_token = np.tanh(feats.mean(axis=0) @ self._wg + self._bg)
        return PatchGrid(
            patch_width=pw,
            features=feats,
            centers=patch_centers(self.image_size, pw),
            global_token=global_token,
            image_size=self.image_size,
        )

    def spec(self) -> dict:
        return {
            "type": "stub",
            "feature_dim": self.feature_dim,
            "image_size": self.image_size,
            "patch_width": self.patch_width,
            "seed": self.seed,
        }


def encoder_from_spec(spec: dict) -> StubPatchEncoder:
    if spec.get("type", "stub") != "stub":
        raise ValueError(f"unknown-encoder-type: {spec.get('type')!r}")
    return StubPatchEncoder(
        feature_dim=spec.get("feature_dim", 32),
        image_size=spec.get("image_size", 224),
        patch_width=spec.get("patch_width", 14),
        seed=spec.get("seed", 0),
    )


def encode_sketch(image: np.ndarray, encoder: PatchEncoder) -> PatchGrid:
    """Run the frozen encoder on a [0,1] grayscale sketch."""
    image = np.asarray(image, dtype=np.float32)
    if image.ndim != 2 or image.shape[0] != image.shape[1]:
        raise ValueError(f"image-size-mismatch: expected square 2D, got {image.shape}")
    if image.shape[0] != encoder.image_size:
        raise ValueError(
            f"image-size-mismatch: {image.shape[0]} != {encoder.image_size}"
        )
    if image.min() < -1e-6 or image.max() > 1.0 + 1e-6:
        raise ValueError("pixel-range: expected [0, 1] grayscale")
    return encoder(image)
