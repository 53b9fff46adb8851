"""Conditioning inputs for the denoisers and guidance-dropout semantics."""

from __future__ import annotations

import zlib
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ..view_attention.cameras import CameraView
from ..view_attention.masks import PatchGrid

SKETCH_MODES = ("view_aware_local", "global", "view_agnostic")


@dataclass
class Conditioning:
    """What the denoiser is conditioned on.

    kind "none": unconditional. kind "sketch": patch features plus the view
    used for projection and an attention mode. kind "category": an embedding
    vector modulating features per level. ``null`` marks the dropped-out
    condition for classifier-free guidance; a null condition follows the
    exact computation path of kind "none".
    """

    kind: str = "none"
    patches: Optional[PatchGrid] = None
    view: Optional[CameraView] = None
    mode: str = "view_aware_local"
    embedding: Optional[np.ndarray] = None
    null: bool = False

    def __post_init__(self):
        if self.kind not in ("none", "sketch", "category"):
            raise ValueError(f"unknown-conditioning-kind: {self.kind!r}")
        if self.kind == "sketch":
            if self.mode not in SKETCH_MODES:
                raise ValueError(f"unknown-sketch-mode: {self.mode!r}")
            if not self.null and self.patches is None:
                raise ValueError("sketch conditioning requires patches")
            if not self.null and self.mode == "view_aware_local" and self.view is None:
                raise ValueError("view_aware_local requires a view")
        if self.kind == "category" and not self.null and self.embedding is None:
            raise ValueError("category conditioning requires an embedding")

    @property
    def is_active(self) -> bool:
        return self.kind != "none" and not self.null

    def as_null(self) -> "Conditioning":
        return replace(self, null=True)


NULL = Conditioning()


def category_embedding(name: str, dim: int = 32) -> np.ndarray:
    """Deterministic stand-in for a frozen text encoder: a fixed random
    unit vector keyed by the category name."""
    seed = zlib.crc32(name.strip().lower().encode())
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim).astype(np.float32)
    return v / np.linalg.norm(v)
