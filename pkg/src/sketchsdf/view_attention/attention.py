"""Masked multi-head cross-attention from voxel features to sketch patch features."""

from __future__ import annotations

import math

import numpy as np
import torch
from torch import nn


def sinusoidal_encoding(positions: np.ndarray, dim: int) -> np.ndarray:
    """Fixed sin/cos features per scalar position column, concatenated.

    ``positions`` is (N, A) of axis indices; each axis contributes ``dim``
    features (dim/2 sin + dim/2 cos), giving (N, A*dim).
    """
    half = dim // 2
    freqs = np.exp(-math.log(10000.0) * np.arange(half) / max(half - 1, 1))
    ang = positions[..., None] * freqs  # (N, A, half)
    enc = np.concatenate([np.sin(ang), np.cos(ang)], axis=-1)  # (N, A, 2*half)
    return enc.reshape(positions.shape[0], -1).astype(np.float32)


def voxel_position_encoding(resolution: int, dim_per_axis: int = 16) -> np.ndarray:
    """(R^3, 3*dim_per_axis) encoding of integer voxel indices, C-order flat."""
    idx = np.stack(
        np.meshgrid(
            np.arange(resolution), np.arange(resolution), np.arange(resolution),
            indexing="ij",
        ),
        axis=-1,
    ).reshape(-1, 3)
    return sinusoidal_encoding(idx.astype(np.float64), dim_per_axis)


def patch_position_encoding(grid_size: int, dim_per_axis: int = 16) -> np.ndarray:
    """(P, 2*dim_per_axis) encoding of (row, col) patch indices, row-major flat."""
    rows, cols = np.meshgrid(np.arange(grid_size), np.arange(grid_size), indexing="ij")
    idx = np.stack([rows.reshape(-1), cols.reshape(-1)], axis=-1)
    return sinusoidal_encoding(idx.astype(np.float64), dim_per_axis)


class LocalCrossAttention(nn.Module):
    """One-layer multi-head cross-attention with a per-row boolean mask.

    Q comes from voxel features, K/V from patch features. Absolute
    positional encodings (projected sinusoids) are added to both sides
    before the Q/K/V projections. Head outputs are concatenated (no output
    projection) and added residually; rows whose mask is empty receive a
    zero update.
    """

    def __init__(self, voxel_dim: int, patch_dim: int, heads: int = 4,
                 pos_dim_per_axis: int = 16):
        super().__init__()
        if voxel_dim % heads != 0:
            raise ValueError(f"voxel_dim {voxel_dim} not divisible by heads {heads}")
        self.heads = heads
        self.head_dim = voxel_dim // heads
        self.voxel_dim = voxel_dim
        self.patch_dim = patch_dim
        self.pos_dim_per_axis = pos_dim_per_axis
        self.w_q = nn.Linear(voxel_dim, voxel_dim, bias=False)
        self.w_k = nn.Linear(patch_dim, voxel_dim, bias=False)
        self.w_v = nn.Linear(patch_dim, voxel_dim, bias=False)
        self.voxel_pos_proj = nn.Linear(3 * pos_dim_per_axis, voxel_dim, bias=False)
        self.patch_pos_proj = nn.Linear(2 * pos_dim_per_axis, patch_dim, bias=False)

    def forward(
        self,
        voxel_features: torch.Tensor,  # (N, C)
        patch_features: torch.Tensor,  # (P, D)
        mask: torch.Tensor,  # (N, P) bool
        voxel_positions: torch.Tensor,  # (N, 3*pos_dim)
        patch_positions: torch.Tensor,  # (P, 2*pos_dim)
    ) -> torch.Tensor:
        n, c = voxel_features.shape
        p = patch_features.shape[0]
        h, hd = self.heads, self.head_dim

        q_in = voxel_features + self.voxel_pos_proj(voxel_positions)
        kv_in = patch_features + self.patch_pos_proj(patch_positions)
        q = self.w_q(q_in).view(n, h, hd)
        k = self.w_k(kv_in).view(p, h, hd)
        v = self.w_v(kv_in).view(p, h, hd)

        logits = torch.einsum("nhd,phd->nhp", q, k) / math.sqrt(hd)
        neg = torch.finfo(logits.dtype).min
        logits = logits.masked_fill(~mask[:, None, :], neg)
        weights = torch.softmax(logits, dim=-1)
        # Rows with no unmasked patch produce a zero update.
        any_patch = mask.any(dim=1)
        weights = weights * any_patch[:, None, None]
        update = torch.einsum("nhp,phd->nhd", weights, v).reshape(n, c)
        return voxel_features + update
