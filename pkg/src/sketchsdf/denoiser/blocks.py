"""Shared denoiser building blocks: time embedding, residual blocks, init."""

from __future__ import annotations

import math

import torch
from torch import nn


class TimeEmbedding(nn.Module):
    """Sinusoidal embedding of t*1000 followed by a two-layer projection."""

    def __init__(self, dim: int):
        super().__init__()
        if dim % 2 != 0:
            raise ValueError(f"time embedding dim must be even, got {dim}")
        self.dim = dim
        self.proj = nn.Sequential(nn.Linear(dim, dim), nn.SiLU(), nn.Linear(dim, dim))

    def forward(self, t: torch.Tensor) -> torch.Tensor:
        t = torch.as_tensor(t, dtype=self.proj[0].weight.dtype,
                            device=self.proj[0].weight.device)
        if t.ndim == 0:
            t = t[None]
        half = self.dim // 2
        freqs = torch.exp(
            -math.log(10000.0)
            * torch.arange(half, dtype=t.dtype, device=t.device)
            / max(half - 1, 1)
        )
        ang = t[:, None] * 1000.0 * freqs[None, :]
        emb = torch.cat([torch.sin(ang), torch.cos(ang)], dim=-1)
        return self.proj(emb)


def time_embedding(t: float, dim: int, module: TimeEmbedding | None = None) -> torch.Tensor:
    """Functional form of the embedding (fresh deterministic module if none given)."""
    if module is None:
        module = TimeEmbedding(dim)
        init_parameters(module, torch.Generator().manual_seed(0))
    with torch.no_grad():
        return module(torch.tensor(float(t)))[0]


class ResBlock3D(nn.Module):
    """Pre-activation residual block: (GN -> SiLU -> conv) x2 with additive
    time conditioning after the first conv."""

    def __init__(self, channels: int, temb_dim: int, groups: int = 8):
        super().__init__()
        g = min(groups, channels)
        while channels % g != 0:
            g -= 1
        self.norm1 = nn.GroupNorm(g, channels)
        self.conv1 = nn.Conv3d(channels, channels, 3, padding=1)
        self.temb = nn.Linear(temb_dim, channels)
        self.norm2 = nn.GroupNorm(g, channels)
        self.conv2 = nn.Conv3d(channels, channels, 3, padding=1)
        self.act = nn.SiLU()

    def forward(self, x: torch.Tensor, temb: torch.Tensor) -> torch.Tensor:
        h = self.conv1(self.act(self.norm1(x)))
        h = h + self.temb(temb)[:, :, None, None, None]
        h = self.conv2(self.act(self.norm2(h)))
        return x + h


class SparseResBlock(nn.Module):
    """Residual block over sparse voxel features (N, C) with per-voxel
    LayerNorm (keeps concatenated batches independent)."""

    def __init__(self, channels: int, temb_dim: int, conv_factory):
        super().__init__()
        self.norm1 = nn.LayerNorm(channels)
        self.conv1 = conv_factory(channels, channels)
        self.temb = nn.Linear(temb_dim, channels)
        self.norm2 = nn.LayerNorm(channels)
        self.conv2 = conv_factory(channels, channels)
        self.act = nn.SiLU()

    def forward(self, x, temb_per_voxel, structure, level):
        h = self.conv1(self.act(self.norm1(x)), structure, level)
        h = h + self.temb(temb_per_voxel)
        h = self.conv2(self.act(self.norm2(h)), structure, level)
        return x + h


def init_parameters(module: nn.Module, generator: torch.Generator) -> None:
    """Deterministic parameter init from a seeded generator.

    Parameters are visited in sorted-name order so construction order never
    matters: weights with >=2 dims get fan-in uniform init, norm weights 1,
    everything else 0.
    """
    params = sorted(module.named_parameters(), key=lambda kv: kv[0])
    with torch.no_grad():
        for name, p in params:
            if p.ndim >= 2:
                fan_in = p.shape[1] * (p[0, 0].numel() if p.ndim > 2 else 1)
                bound = 1.0 / math.sqrt(max(fan_in, 1))
                p.uniform_(-bound, bound, generator=generator)
            elif name.endswith("weight"):  # norm scales
                p.fill_(1.0)
            else:
                p.zero_()
