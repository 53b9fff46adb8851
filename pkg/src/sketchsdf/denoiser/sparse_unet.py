"""Sparse-voxel U-Net predicting x0 for SDF diffusion.

The sparse structure (coord sets per level, 27-neighborhoods, parent maps)
is fixed through the network: coarser levels are the parent sets of the
input coords. Convolutions treat absent neighbors as zero features;
downsampling mean-pools the existing children of each parent; upsampling
broadcasts parent features to existing children only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import torch
from torch import nn

from ..fields.types import SparseVoxelGrid
from .blocks import SparseResBlock, TimeEmbedding, init_parameters

_OFFSETS = np.array(
    [[dx, dy, dz] for dx in (-1, 0, 1) for dy in (-1, 0, 1) for dz in (-1, 0, 1)],
    dtype=np.int64,
)


def _codes(coords: np.ndarray, resolution: int) -> np.ndarray:
    return (coords[:, 0] * resolution + coords[:, 1]) * resolution + coords[:, 2]


def _neighbor_table(coords: np.ndarray, resolution: int) -> np.ndarray:
    """(N, 27) indices into coords for each 3^3 offset, -1 where absent."""
    codes = _codes(coords, resolution)
    order = np.argsort(codes)
    sorted_codes = codes[order]
    n = len(coords)
    table = np.full((n, 27), -1, dtype=np.int64)
    for k, off in enumerate(_OFFSETS):
        nb = coords + off
        valid = np.all((nb >= 0) & (nb < resolution), axis=1)
        nb_codes = _codes(nb, resolution)
        pos = np.searchsorted(sorted_codes, nb_codes)
        pos_c = np.clip(pos, 0, n - 1)
        found = valid & (sorted_codes[pos_c] == nb_codes)
        table[found, k] = order[pos_c[found]]
    return table


class SparseStructure:
    """Per-level connectivity for one sample (or a concatenated batch)."""

    def __init__(self, coords: np.ndarray, resolution: int, num_levels: int):
        self.resolution = resolution
        self.level_coords: List[np.ndarray] = []
        self.level_nbr: List[torch.Tensor] = []
        self.parent_idx: List[torch.Tensor] = []
        self.child_counts: List[torch.Tensor] = []
        self.num_voxels: List[int] = []
        self.batch_index: List[torch.Tensor] = []

        cur = np.asarray(coords, dtype=np.int64)
        res = resolution
        batch = np.zeros(len(cur), dtype=np.int64)
        for level in range(num_levels):
            self.level_coords.append(cur)
            self.level_nbr.append(torch.from_numpy(_neighbor_table(cur, res)))
            self.num_voxels.append(len(cur))
            self.batch_index.append(torch.from_numpy(batch))
            if level < num_levels - 1:
                parents = cur // 2
                r2 = res // 2
                pcodes = _codes(parents, r2)
                uniq, inverse = np.unique(pcodes, return_inverse=True)
                # Decode codes back to coords: code = (x*R + y)*R + z.
                x = uniq // (r2 * r2)
                y = (uniq // r2) % r2
                z = uniq % r2
                pcoords = np.stack([x, y, z], axis=1)
                self.parent_idx.append(torch.from_numpy(inverse))
                counts = np.bincount(inverse, minlength=len(uniq))
                self.child_counts.append(torch.from_numpy(counts.astype(np.float32)))
                # Parents inherit any child's batch id (children never span samples).
                first_child = np.zeros(len(uniq), dtype=np.int64)
                first_child[inverse] = np.arange(len(inverse))
                batch = batch[first_child]
                cur = pcoords
                res = r2

    @property
    def num_levels(self) -> int:
        return len(self.level_coords)


def concat_structures(structs: Sequence[SparseStructure]) -> SparseStructure:
    """Merge per-sample structures into one batched structure (disjoint blocks)."""
    if not structs:
        raise ValueError("empty batch")
    out = object.__new__(SparseStructure)
    out.resolution = structs[0].resolution
    levels = structs[0].num_levels
    out.level_coords, out.level_nbr, out.parent_idx = [], [], []
    out.child_counts, out.num_voxels, out.batch_index = [], [], []
    for level in range(levels):
        vox_offset = 0
        par_offset = 0
        coords, nbrs, pidx, counts, bidx = [], [], [], [], []
        for b, s in enumerate(structs):
            coords.append(s.level_coords[level])
            nbr = s.level_nbr[level].clone()
            nbr[nbr >= 0] += vox_offset
            nbrs.append(nbr)
            bidx.append(torch.full((s.num_voxels[level],), b, dtype=torch.int64))
            if level < levels - 1:
                pidx.append(s.parent_idx[level] + par_offset)
                counts.append(s.child_counts[level])
                par_offset += s.num_voxels[level + 1]
            vox_offset += s.num_voxels[level]
        out.level_coords.append(np.concatenate(coords))
        out.level_nbr.append(torch.cat(nbrs))
        out.num_voxels.append(vox_offset)
        out.batch_index.append(torch.cat(bidx))
        if level < levels - 1:
            out.parent_idx.append(torch.cat(pidx))
            out.child_counts.append(torch.cat(counts))
    return out


class SparseConv(nn.Module):
    """3^3 convolution over a sparse coord set via neighbor gathering."""

    def __init__(self, in_channels: int, out_channels: int):
        super().__init__()
        self.in_channels = in_channels
        self.linear = nn.Linear(27 * in_channels, out_channels)

    def forward(self, x: torch.Tensor, structure: SparseStructure, level: int) -> torch.Tensor:
        nbr = structure.level_nbr[level].to(x.device)
        n = x.shape[0]
        padded = torch.cat([x, x.new_zeros(1, x.shape[1])], dim=0)
        idx = torch.where(nbr >= 0, nbr, torch.full_like(nbr, n))
        gathered = padded[idx.reshape(-1)].reshape(n, 27 * self.in_channels)
        return self.linear(gathered)


@dataclass(frozen=True)
class SparseUNetConfig:
    levels: Tuple[Tuple[int, int], ...] = ((32, 16), (16, 32), (8, 64))
    time_dim: int = 64

    def __post_init__(self):
        for (r0, _), (r1, _) in zip(self.levels, self.levels[1:]):
            if r1 * 2 != r0:
                raise ValueError(f"resolutions must halve per level: {r0} -> {r1}")
        if any(w <= 0 for _, w in self.levels):
            raise ValueError("feature widths must be positive")

    @property
    def resolution(self) -> int:
        return self.levels[0][0]

    def to_dict(self) -> dict:
        return {"levels": [list(l) for l in self.levels], "time_dim": self.time_dim}

    @staticmethod
    def from_dict(d: dict) -> "SparseUNetConfig":
        return SparseUNetConfig(
            levels=tuple(tuple(l) for l in d["levels"]), time_dim=d.get("time_dim", 64)
        )


class SparseUNet(nn.Module):
    """x0-prediction U-Net over a fixed sparse voxel structure."""

    def __init__(self, cfg: SparseUNetConfig, seed: int = 0):
        super().__init__()
        self.cfg = cfg
        widths = [w for _, w in cfg.levels]
        self.time_embedding = TimeEmbedding(cfg.time_dim)
        self.stem = SparseConv(2, widths[0])
        self.down_blocks = nn.ModuleList(
            [SparseResBlock(w, cfg.time_dim, SparseConv) for w in widths]
        )
        self.down_proj = nn.ModuleList(
            [nn.Linear(widths[i], widths[i + 1]) for i in range(len(widths) - 1)]
        )
        self.bottleneck = nn.ModuleList(
            [SparseResBlock(widths[-1], cfg.time_dim, SparseConv) for _ in range(2)]
        )
        self.up_proj = nn.ModuleList()
        self.up_fuse = nn.ModuleList()
        self.up_blocks = nn.ModuleList()
        for i in range(len(widths) - 1, 0, -1):
            self.up_proj.append(nn.Linear(widths[i], widths[i - 1]))
            self.up_fuse.append(SparseConv(2 * widths[i - 1], widths[i - 1]))
            self.up_blocks.append(SparseResBlock(widths[i - 1], cfg.time_dim, SparseConv))
        self.head_norm = nn.LayerNorm(widths[0])
        self.head = nn.Linear(widths[0], 1)
        self.act = nn.SiLU()
        init_parameters(self, torch.Generator().manual_seed(seed))

    def forward(
        self,
        values: torch.Tensor,  # (N,) or (N, 1) noisy SDF values
        self_cond: torch.Tensor,
        t,
        structure: SparseStructure,
    ) -> torch.Tensor:
        if values.ndim == 1:
            values = values[:, None]
        if self_cond.ndim == 1:
            self_cond = self_cond[:, None]
        if values.shape != self_cond.shape:
            raise ValueError("shape-mismatch: values vs self_cond")
        t = torch.as_tensor(t, dtype=values.dtype, device=values.device)
        if t.ndim == 0:
            t = t[None]
        temb_all = self.time_embedding(t)

        h = self.stem(torch.cat([values, self_cond], dim=1), structure, 0)
        skips = []
        for level, block in enumerate(self.down_blocks):
            tv = temb_all[structure.batch_index[level].clamp(max=temb_all.shape[0] - 1)]
            h = block(h, tv, structure, level)
            skips.append(h)
            if level < len(self.down_proj):
                pooled = self._pool(h, structure, level)
                h = self.down_proj[level](pooled)
        last = len(self.down_blocks) - 1
        tv = temb_all[structure.batch_index[last].clamp(max=temb_all.shape[0] - 1)]
        for block in self.bottleneck:
            h = block(h, tv, structure, last)
        for j in range(len(self.up_proj)):
            level = last - j - 1
            parent_idx = structure.parent_idx[level].to(h.device)
            h = self.up_proj[j](h)[parent_idx]  # broadcast to existing children
            h = self.up_fuse[j](torch.cat([h, skips[level]], dim=1), structure, level)
            tv = temb_all[structure.batch_index[level].clamp(max=temb_all.shape[0] - 1)]
            h = self.up_blocks[j](h, tv, structure, level)
        return self.head(self.act(self.head_norm(h)))[:, 0]

    @staticmethod
    def _pool(h: torch.Tensor, structure: SparseStructure, level: int) -> torch.Tensor:
        parent_idx = structure.parent_idx[level].to(h.device)
        counts = structure.child_counts[level].to(h.device, h.dtype)
        m = counts.shape[0]
        pooled = h.new_zeros(m, h.shape[1])
        pooled.index_add_(0, parent_idx, h)
        return pooled / counts[:, None]


def structure_for(grid: SparseVoxelGrid, cfg: SparseUNetConfig) -> SparseStructure:
    if grid.resolution != cfg.resolution:
        raise ValueError(
            f"resolution-mismatch: grid {grid.resolution} != config {cfg.resolution}"
        )
    return SparseStructure(grid.coords, grid.resolution, len(cfg.levels))


def sparse_forward(
    net: SparseUNet,
    x_t: SparseVoxelGrid,
    self_cond: Optional[SparseVoxelGrid],
    t: float,
) -> SparseVoxelGrid:
    """Grid-level single-sample forward pass; output on exactly the input coords."""
    if self_cond is None:
        sc_values = np.zeros_like(x_t.values)
    else:
        if self_cond.resolution != x_t.resolution or not np.array_equal(
            self_cond.coords, x_t.coords
        ):
            raise ValueError("coord-set-mismatch: x_t vs self_cond")
        sc_values = self_cond.values
    structure = structure_for(x_t, net.cfg)
    with torch.no_grad():
        out = net(
            torch.as_tensor(x_t.values, dtype=torch.float32),
            torch.as_tensor(sc_values, dtype=torch.float32),
            float(t),
            structure,
        )
    return x_t.with_values(out.numpy())
