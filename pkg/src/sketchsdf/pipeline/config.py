"""Run configuration: serialized with every run, overridable from the
environment (prefix LAS_) and CLI flags."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional, Tuple

from ..denoiser.dense_unet import DenseUNetConfig
from ..denoiser.sparse_unet import SparseUNetConfig

ENV_PREFIX = "LAS_"

# Full-scale network shapes (desk-scale defaults live on RunConfig): a
# 5-level dense U-Net over the 64^3 shell grid and a 4-level sparse U-Net
# over the 128^3 subdivided voxels.
FULL_SCALE_DENSE_LEVELS = ((64, 32), (32, 64), (16, 128), (8, 256), (4, 256))
FULL_SCALE_SPARSE_LEVELS = ((128, 32), (64, 64), (32, 128), (16, 256))
FULL_SCALE_RESOLUTIONS = (64, 128)


@dataclass(frozen=True)
class OptimizerConfig:
    name: str = "adam"
    learning_rate: float = 2e-4
    epochs: int = 30
    batch_size: int = 8


@dataclass(frozen=True)
class SamplerConfig:
    steps: int = 50
    guidance: float = 3.0
    method: str = "ddpm"


@dataclass(frozen=True)
class RunConfig:
    """Desk-scale defaults; full-scale values noted in field comments."""

    seed: int = 0
    coarse_resolution: int = 16  # 64 at full scale
    fine_resolution: int = 32  # 128 at full scale
    conditioning: str = "none"  # none | sketch | category
    sketch_mode: str = "view_aware_local"
    dense_levels: Tuple[Tuple[int, int], ...] = ((16, 16), (8, 32), (4, 64))
    sparse_levels: Tuple[Tuple[int, int], ...] = ((32, 16), (16, 32), (8, 64))
    attention_levels: Tuple[int, ...] = (8, 4)
    # Occupancy stage full-scale reference: lr 2e-4 / 300 epochs (Adam); category
    # variant 1e-4 / 4000 (AdamW). SDF stage reference: lr 1e-4 / 500 epochs (AdamW).
    occ_optimizer: OptimizerConfig = OptimizerConfig("adam", 2e-4, 30, 8)
    sdf_optimizer: OptimizerConfig = OptimizerConfig("adamw", 1e-4, 30, 8)
    sampler: SamplerConfig = SamplerConfig()
    self_cond_probability: float = 0.5
    cond_dropout: float = 0.1
    encoder_seed: int = 0
    patch_feature_dim: int = 32
    embed_dim: int = 32
    dataset_dir: Optional[str] = None
    run_dir: Optional[str] = None
    dilate_predicted_shell: bool = False

    def __post_init__(self):
        if self.fine_resolution != 2 * self.coarse_resolution:
            raise ValueError(
                f"fine must be 2 x coarse: {self.fine_resolution} != "
                f"2 x {self.coarse_resolution}"
            )
        if self.conditioning not in ("none", "sketch", "category"):
            raise ValueError(f"unknown-conditioning: {self.conditioning}")

    def dense_config(self) -> DenseUNetConfig:
        return DenseUNetConfig(
            levels=tuple(tuple(l) for l in self.dense_levels),
            attention_levels=tuple(self.attention_levels)
            if self.conditioning == "sketch"
            and self.sketch_mode in ("view_aware_local", "view_agnostic")
            else (),
            patch_feature_dim=self.patch_feature_dim,
            embed_dim=self.embed_dim,
        )

    def sparse_config(self) -> SparseUNetConfig:
        return SparseUNetConfig(levels=tuple(tuple(l) for l in self.sparse_levels))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["dense_levels"] = [list(l) for l in self.dense_levels]
        d["sparse_levels"] = [list(l) for l in self.sparse_levels]
        d["attention_levels"] = list(self.attention_levels)
        return d

    @staticmethod
    def from_dict(d: dict) -> "RunConfig":
        d = dict(d)
        for key in ("dense_levels", "sparse_levels"):
            if key in d:
                d[key] = tuple(tuple(l) for l in d[key])
        if "attention_levels" in d:
            d["attention_levels"] = tuple(d["attention_levels"])
        for key, cls in (
            ("occ_optimizer", OptimizerConfig),
            ("sdf_optimizer", OptimizerConfig),
            ("sampler", SamplerConfig),
        ):
            if key in d and isinstance(d[key], dict):
                d[key] = cls(**d[key])
        return RunConfig(**d)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))

    @staticmethod
    def load(path) -> "RunConfig":
        return RunConfig.from_dict(json.loads(Path(path).read_text()))


# Flat override keys -> (section, field) paths into the config dict.
_OVERRIDE_PATHS = {
    "seed": ("seed",),
    "coarse_resolution": ("coarse_resolution",),
    "fine_resolution": ("fine_resolution",),
    "conditioning": ("conditioning",),
    "sketch_mode": ("sketch_mode",),
    "steps": ("sampler", "steps"),
    "guidance": ("sampler", "guidance"),
    "sampler_method": ("sampler", "method"),
    "occ_lr": ("occ_optimizer", "learning_rate"),
    "occ_epochs": ("occ_optimizer", "epochs"),
    "occ_batch_size": ("occ_optimizer", "batch_size"),
    "sdf_lr": ("sdf_optimizer", "learning_rate"),
    "sdf_epochs": ("sdf_optimizer", "epochs"),
    "sdf_batch_size": ("sdf_optimizer", "batch_size"),
    "self_cond_probability": ("self_cond_probability",),
    "cond_dropout": ("cond_dropout",),
    "dataset_dir": ("dataset_dir",),
    "run_dir": ("run_dir",),
    "dilate_predicted_shell": ("dilate_predicted_shell",),
}


def apply_env_overrides(config: RunConfig, environ=None) -> RunConfig:
    """LAS_<KEY>=value overrides; values parsed as JSON when possible."""
    environ = os.environ if environ is None else environ
    d = config.to_dict()
    for env_key, value in environ.items():
        if not env_key.startswith(ENV_PREFIX):
            continue
        key = env_key[len(ENV_PREFIX) :].lower()
        path = _OVERRIDE_PATHS.get(key)
        if path is None:
            continue
        try:
            parsed = json.loads(value)
        except json.JSONDecodeError:
            parsed = value
        node = d
        for p in path[:-1]:
            node = node[p]
        node[path[-1]] = parsed
    return RunConfig.from_dict(d)
