"""Patch grids and view-projection attention masks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass
class PatchGrid:
    """Per-patch features of a square image tiled by non-overlapping patches.

    features[j] corresponds to the patch at row j // cols, col j % cols;
    centers[j] = ((col + 0.5) pw, (row + 0.5) pw) in pixels.
    """

    patch_width: int
    features: np.ndarray  # (P, D)
    centers: np.ndarray  # (P, 2)
    global_token: Optional[np.ndarray] = None
    image_size: int = 224

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float32)
        self.centers = np.asarray(self.centers, dtype=np.float64).reshape(-1, 2)
        if len(self.features) != len(self.centers):
            raise ValueError("feature/center count mismatch")

    @property
    def num_patches(self) -> int:
        return len(self.features)

    @property
    def grid_size(self) -> int:
        return self.image_size // self.patch_width

    def same_geometry(self, other: "PatchGrid") -> bool:
        return (
            self.patch_width == other.patch_width
            and self.image_size == other.image_size
            and self.features.shape == other.features.shape
        )


def patch_centers(image_size: int, patch_width: int) -> np.ndarray:
    if image_size % patch_width != 0:
        raise ValueError(f"patches must tile the image: {image_size} % {patch_width}")
    g = image_size // patch_width
    cols, rows = np.meshgrid(np.arange(g), np.arange(g))  # row-major order
    cx = (cols.reshape(-1) + 0.5) * patch_width
    cy = (rows.reshape(-1) + 0.5) * patch_width
    return np.stack([cx, cy], axis=1).astype(np.float64)


def default_distance_threshold(patch_width: int) -> float:
    """Neighborhood radius: 4 x patch width."""
    return 4.0 * patch_width


def build_attention_mask(
    projected: np.ndarray,
    patches: PatchGrid,
    d_delta: float,
    valid: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Boolean [num_voxels x num_patches]: attend where the projected voxel
    center lies within d_delta (Euclidean pixels) of the patch center.
    Invalid projections give all-false rows."""
    if d_delta <= 0:
        raise ValueError(f"invalid-threshold: {d_delta}")
    projected = np.asarray(projected, dtype=np.float64).reshape(-1, 2)
    diff = projected[:, None, :] - patches.centers[None, :, :]
    mask = (diff[..., 0] ** 2 + diff[..., 1] ** 2) < d_delta**2
    if valid is not None:
        mask &= np.asarray(valid, dtype=bool).reshape(-1, 1)
    return mask


def stitch_patch_features(a: PatchGrid, b: PatchGrid, region: np.ndarray) -> PatchGrid:
    """Per-patch selection: feature j comes from b where region[j], else from a.

    ``region`` is a boolean array of length num_patches (or a (rows, cols)
    grid). Patch positions and a's global token are kept.
    """
    if not a.same_geometry(b):
        raise ValueError("geometry-mismatch")
    region = np.asarray(region, dtype=bool).reshape(-1)
    if len(region) != a.num_patches:
        raise ValueError(
            f"region-size-mismatch: {len(region)} != {a.num_patches}"
        )
    features = np.where(region[:, None], b.features, a.features)
    return PatchGrid(
        patch_width=a.patch_width,
        features=features,
        centers=a.centers.copy(),
        global_token=None if a.global_token is None else a.global_token.copy(),
        image_size=a.image_size,
    )


def half_region(rows: int, cols: int, which: str) -> np.ndarray:
    """Boolean patch mask selecting one half of the grid (row-major flat)."""
    grid = np.zeros((rows, cols), dtype=bool)
    if which == "top":
        grid[: rows // 2, :] = True
    elif which == "bottom":
        grid[rows // 2 :, :] = True
    elif which == "left":
        grid[:, : cols // 2] = True
    elif which == "right":
        grid[:, cols // 2 :] = True
    else:
        raise ValueError(f"unknown-region: {which!r}")
    return grid.reshape(-1)
