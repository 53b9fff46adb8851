"""Dense 3D U-Net predicting x0 for occupancy diffusion, with sketch/category
conditioning hooks."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np
import torch
from torch import nn

from ..fields.types import DenseField3D
from ..view_attention.attention import (
    LocalCrossAttention,
    patch_position_encoding,
    voxel_position_encoding,
)
from ..view_attention.cameras import CameraView, project_voxel_centers
from ..view_attention.masks import PatchGrid, build_attention_mask, patch_centers
from .blocks import ResBlock3D, TimeEmbedding, init_parameters
from .conditioning import Conditioning


@dataclass(frozen=True)
class DenseUNetConfig:
    """Levels are (resolution, feature_width) pairs, finest first; resolutions
    halve per level. Attention levels default to the two coarsest."""

    levels: Tuple[Tuple[int, int], ...] = ((16, 16), (8, 32), (4, 64))
    attention_levels: Tuple[int, ...] = ()
    bottleneck_blocks: int = 2
    time_dim: int = 64
    groups: int = 8
    heads: int = 4
    patch_feature_dim: int = 32
    embed_dim: int = 32
    d_delta: float = 56.0
    pos_dim_per_axis: int = 16
    patch_width: int = 14
    image_size: int = 224

    def __post_init__(self):
        if not self.levels:
            raise ValueError("levels must be non-empty")
        for (r0, w0), (r1, w1) in zip(self.levels, self.levels[1:]):
            if r1 * 2 != r0:
                raise ValueError(f"resolutions must halve per level: {r0} -> {r1}")
        if any(w <= 0 for _, w in self.levels):
            raise ValueError("feature widths must be positive")
        resolutions = {r for r, _ in self.levels}
        if not set(self.attention_levels) <= resolutions:
            raise ValueError(
                f"attention levels {self.attention_levels} not in {sorted(resolutions)}"
            )

    @property
    def resolution(self) -> int:
        return self.levels[0][0]

    @staticmethod
    def with_default_attention(
        levels: Sequence[Tuple[int, int]], **kw
    ) -> "DenseUNetConfig":
        """Attention at the two coarsest levels."""
        coarsest = tuple(sorted(r for r, _ in levels)[:2])
        return DenseUNetConfig(levels=tuple(levels), attention_levels=coarsest, **kw)

    def to_dict(self) -> dict:
        return {
            "levels": [list(l) for l in self.levels],
            "attention_levels": list(self.attention_levels),
            "bottleneck_blocks": self.bottleneck_blocks,
            "time_dim": self.time_dim,
            "groups": self.groups,
            "heads": self.heads,
            "patch_feature_dim": self.patch_feature_dim,
            "embed_dim": self.embed_dim,
            "d_delta": self.d_delta,
            "pos_dim_per_axis": self.pos_dim_per_axis,
            "patch_width": self.patch_width,
            "image_size": self.image_size,
        }

    @staticmethod
    def from_dict(d: dict) -> "DenseUNetConfig":
        d = dict(d)
        d["levels"] = tuple(tuple(l) for l in d["levels"])
        d["attention_levels"] = tuple(d.get("attention_levels", ()))
        return DenseUNetConfig(**d)


@lru_cache(maxsize=256)
def _cached_mask(view_key, resolution: int, image_size: int, patch_width: int,
                 d_delta: float) -> np.ndarray:
    view = CameraView(*view_key)
    projected, valid = project_voxel_centers(resolution, view)
    grid = PatchGrid(
        patch_width=patch_width,
        features=np.zeros((((image_size // patch_width) ** 2), 1), dtype=np.float32),
        centers=patch_centers(image_size, patch_width),
        image_size=image_size,
    )
    return build_attention_mask(projected, grid, d_delta, valid)


def attention_mask_for(view: CameraView, resolution: int, image_size: int,
                       patch_width: int, d_delta: float) -> np.ndarray:
    key = (view.azimuth, view.elevation, view.distance, view.fov_y, view.image_size)
    return _cached_mask(key, resolution, image_size, patch_width, d_delta)


class _LevelConditioner(nn.Module):
    """Per-level conditioning: global multiplicative modulation and/or
    masked local cross-attention."""

    def __init__(self, cfg: DenseUNetConfig, width: int, resolution: int):
        super().__init__()
        self.resolution = resolution
        self.cfg = cfg
        self.modulate = nn.Sequential(
            nn.Linear(cfg.embed_dim, width), nn.SiLU(), nn.Linear(width, width)
        )
        self.attend = (
            LocalCrossAttention(
                width, cfg.patch_feature_dim, cfg.heads, cfg.pos_dim_per_axis
            )
            if resolution in cfg.attention_levels
            else None
        )
        if self.attend is not None:
            self.register_buffer(
                "voxel_pos",
                torch.from_numpy(
                    voxel_position_encoding(resolution, cfg.pos_dim_per_axis)
                ),
                persistent=False,
            )
            self.register_buffer(
                "patch_pos",
                torch.from_numpy(
                    patch_position_encoding(
                        cfg.image_size // cfg.patch_width, cfg.pos_dim_per_axis
                    )
                ),
                persistent=False,
            )

    def forward(self, h: torch.Tensor, conds: Optional[List[Conditioning]]) -> torch.Tensor:
        if conds is None or all(c is None or not c.is_active for c in conds):
            return h
        c, r = h.shape[1], h.shape[2]
        rows = []
        for i in range(h.shape[0]):
            cond = conds[i] if i < len(conds) else None
            hi = h[i]
            if cond is None or not cond.is_active:
                pass
            elif cond.kind == "category" or (
                cond.kind == "sketch" and cond.mode == "global"
            ):
                emb = (
                    cond.embedding
                    if cond.kind == "category"
                    else cond.patches.global_token
                )
                emb_t = torch.as_tensor(emb, dtype=h.dtype, device=h.device)
                scale = 1.0 + self.modulate(emb_t)
                hi = hi * scale[:, None, None, None]
            elif cond.kind == "sketch" and self.attend is not None:
                if cond.mode == "view_aware_local":
                    mask_np = attention_mask_for(
                        cond.view, self.resolution, self.cfg.image_size,
                        self.cfg.patch_width, self.cfg.d_delta,
                    )
                    mask = torch.from_numpy(mask_np).to(h.device)
                else:  # view_agnostic
                    p = cond.patches.num_patches
                    mask = torch.ones((r**3, p), dtype=torch.bool, device=h.device)
                feats = torch.as_tensor(
                    cond.patches.features, dtype=h.dtype, device=h.device
                )
                vox = hi.reshape(c, -1).transpose(0, 1)  # (R^3, C), C-order
                vox = self.attend(
                    vox, feats, mask,
                    self.voxel_pos.to(h.dtype), self.patch_pos.to(h.dtype),
                )
                hi = vox.transpose(0, 1).reshape(c, r, r, r)
            rows.append(hi)
        return torch.stack(rows)


class DenseUNet(nn.Module):
    """x0-prediction U-Net over dense voxel grids.

    Input channels: the noisy field and the self-conditioning estimate.
    """

    def __init__(self, cfg: DenseUNetConfig, seed: int = 0):
        super().__init__()
        self.cfg = cfg
        widths = [w for _, w in cfg.levels]
        resolutions = [r for r, _ in cfg.levels]
        self.time_embedding = TimeEmbedding(cfg.time_dim)
        self.stem = nn.Conv3d(2, widths[0], 3, padding=1)

        self.down_blocks = nn.ModuleList(
            [ResBlock3D(w, cfg.time_dim, cfg.groups) for w in widths]
        )
        self.down_cond = nn.ModuleList(
            [_LevelConditioner(cfg, w, r) for r, w in cfg.levels]
        )
        self.downsamplers = nn.ModuleList(
            [
                nn.Conv3d(widths[i], widths[i + 1], 3, stride=2, padding=1)
                for i in range(len(widths) - 1)
            ]
        )
        self.bottleneck = nn.ModuleList(
            [
                ResBlock3D(widths[-1], cfg.time_dim, cfg.groups)
                for _ in range(cfg.bottleneck_blocks)
            ]
        )
        self.up_convs = nn.ModuleList()
        self.up_fuse = nn.ModuleList()
        self.up_blocks = nn.ModuleList()
        self.up_cond = nn.ModuleList()
        for i in range(len(widths) - 1, 0, -1):
            self.up_convs.append(nn.Conv3d(widths[i], widths[i - 1], 3, padding=1))
            self.up_fuse.append(nn.Conv3d(2 * widths[i - 1], widths[i - 1], 3, padding=1))
            self.up_blocks.append(ResBlock3D(widths[i - 1], cfg.time_dim, cfg.groups))
            self.up_cond.append(
                _LevelConditioner(cfg, widths[i - 1], resolutions[i - 1])
            )
        g = min(cfg.groups, widths[0])
        while widths[0] % g != 0:
            g -= 1
        self.head_norm = nn.GroupNorm(g, widths[0])
        self.head = nn.Conv3d(widths[0], 1, 3, padding=1)
        self.act = nn.SiLU()
        init_parameters(self, torch.Generator().manual_seed(seed))

    def forward(
        self,
        x_t: torch.Tensor,
        self_cond: torch.Tensor,
        t,
        cond: Optional[List[Optional[Conditioning]]] = None,
    ) -> torch.Tensor:
        if x_t.ndim == 4:
            x_t = x_t[:, None]
        if self_cond.ndim == 4:
            self_cond = self_cond[:, None]
        if x_t.shape != self_cond.shape:
            raise ValueError(f"shape-mismatch: {x_t.shape} vs {self_cond.shape}")
        r = x_t.shape[-1]
        if r != self.cfg.resolution:
            raise ValueError(
                f"resolution-mismatch: input {r} != config {self.cfg.resolution}"
            )
        b = x_t.shape[0]
        if isinstance(cond, Conditioning):
            cond = [cond] * b
        t = torch.as_tensor(t, dtype=x_t.dtype, device=x_t.device)
        if t.ndim == 0:
            t = t.repeat(b)
        temb = self.time_embedding(t)

        h = self.stem(torch.cat([x_t, self_cond], dim=1))
        skips = []
        for i, (block, conditioner) in enumerate(zip(self.down_blocks, self.down_cond)):
            h = block(h, temb)
            h = conditioner(h, cond)
            skips.append(h)
            if i < len(self.downsamplers):
                h = self.downsamplers[i](h)
        for block in self.bottleneck:
            h = block(h, temb)
        for j, (upc, fuse, block, conditioner) in enumerate(
            zip(self.up_convs, self.up_fuse, self.up_blocks, self.up_cond)
        ):
            h = torch.nn.functional.interpolate(h, scale_factor=2, mode="nearest")
            h = upc(h)
            h = fuse(torch.cat([h, skips[-(j + 2)]], dim=1))
            h = block(h, temb)
            h = conditioner(h, cond)
        return self.head(self.act(self.head_norm(h)))

    def as_denoiser(self):
        """Adapter to the numpy-facing sampler: f(x, sc, t, cond) -> np array."""

        def f(x, sc, t, cond):
            with torch.no_grad():
                xt = torch.as_tensor(np.asarray(x, dtype=np.float32))[None]
                sct = torch.as_tensor(np.asarray(sc, dtype=np.float32))[None]
                out = self.forward(xt, sct, float(t), [cond] if cond else None)
            return out[0, 0].numpy().astype(np.float64)

        return f


def dense_forward(
    net: DenseUNet,
    x_t: DenseField3D,
    self_cond: Optional[DenseField3D],
    t: float,
    cond: Optional[Conditioning] = None,
) -> DenseField3D:
    """Field-level single-sample forward pass."""
    sc = (
        np.zeros_like(x_t.values)
        if self_cond is None
        else self_cond.values
    )
    if sc.shape != x_t.values.shape:
        raise ValueError("resolution-mismatch: x_t vs self_cond")
    with torch.no_grad():
        out = net(
            torch.as_tensor(x_t.values, dtype=torch.float32)[None],
            torch.as_tensor(sc, dtype=torch.float32)[None],
            float(t),
            [cond] if cond is not None else None,
        )
    return DenseField3D(x_t.resolution, out[0, 0].numpy(), kind=x_t.kind)
