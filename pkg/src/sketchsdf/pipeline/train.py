"""Two-stage training with deterministic, resumable state."""

from __future__ import annotations

import json
from pathlib import Path
from typing import List, Optional

import numpy as np
import torch

from .. import diffusion
from ..denoiser.checkpoint import load_checkpoint, save_checkpoint
from ..denoiser.dense_unet import DenseUNet
from ..denoiser.sparse_unet import SparseUNet, concat_structures
from .config import OptimizerConfig, RunConfig
from .datasets import OccupancyDataset, SdfDataset


def make_optimizer(params, cfg: OptimizerConfig):
    if cfg.name == "adam":
        return torch.optim.Adam(params, lr=cfg.learning_rate)
    if cfg.name == "adamw":
        return torch.optim.AdamW(params, lr=cfg.learning_rate)
    raise ValueError(f"unknown-optimizer: {cfg.name}")


def _save_trainer_state(path: Path, optimizer, rng: np.random.Generator,
                        epoch: int, losses: List[float]) -> None:
    state = optimizer.state_dict()
    arrays = {}
    meta_state = {}
    for idx, entry in state["state"].items():
        meta_state[str(idx)] = []
        for key, value in entry.items():
            if isinstance(value, torch.Tensor):
                arrays[f"{idx}.{key}"] = value.detach().cpu().numpy()
                meta_state[str(idx)].append(key)
            else:
                meta_state[str(idx)].append([key, value])
    np.savez(path / "optimizer.npz", **arrays)
    (path / "trainer.json").write_text(
        json.dumps(
            {
                "epoch": epoch,
                "losses": losses,
                "param_groups": state["param_groups"],
                "state_keys": meta_state,
                "rng_state": rng.bit_generator.state,
            },
            sort_keys=True,
        )
    )


def _load_trainer_state(path: Path, optimizer) -> tuple:
    meta = json.loads((path / "trainer.json").read_text())
    arrays = np.load(path / "optimizer.npz")
    state = {"param_groups": meta["param_groups"], "state": {}}
    for idx_s, keys in meta["state_keys"].items():
        entry = {}
        for key in keys:
            if isinstance(key, list):
                entry[key[0]] = key[1]
            else:
                entry[key] = torch.from_numpy(arrays[f"{idx_s}.{key}"].copy())
        state["state"][int(idx_s)] = entry
    optimizer.load_state_dict(state)
    rng = np.random.default_rng()
    rng.bit_generator.state = meta["rng_state"]
    return rng, meta["epoch"], meta["losses"]


class StageTrainer:
    """Shared loop: deterministic shuffling, self-conditioning loss,
    per-step loss history, resume support."""

    def __init__(self, net, opt_cfg: OptimizerConfig, run_config: RunConfig,
                 stage: str):
        self.net = net
        self.opt_cfg = opt_cfg
        self.run_config = run_config
        self.stage = stage
        self.optimizer = make_optimizer(net.parameters(), opt_cfg)
        self.rng = np.random.default_rng(run_config.seed)
        self.epoch = 0
        self.losses: List[float] = []

    def resume(self, path) -> None:
        path = Path(path)
        net, _ = load_checkpoint(path)
        self.net.load_state_dict(net.state_dict())
        self.rng, self.epoch, self.losses = _load_trainer_state(path, self.optimizer)

    def save(self, path) -> None:
        path = Path(path)
        save_checkpoint(
            path,
            self.net,
            extra={
                "stage": self.stage,
                "run_config": self.run_config.to_dict(),
                "epochs_trained": self.epoch,
                "final_loss": self.losses[-1] if self.losses else None,
            },
        )
        _save_trainer_state(path, self.optimizer, self.rng, self.epoch, self.losses)

    def _step(self, denoiser, x0, cond, per_sample_t: bool = False) -> float:
        loss = diffusion.training_step(
            denoiser,
            x0,
            cond=cond,
            rng=self.rng,
            self_cond=diffusion.SelfCondConfig(self.run_config.self_cond_probability),
            cond_dropout=self.run_config.cond_dropout,
            per_sample_t=per_sample_t,
        )
        self.optimizer.zero_grad()
        loss.backward()
        self.optimizer.step()
        value = float(loss.detach())
        self.losses.append(value)
        return value

    def epoch_means(self):
        per = max(len(self.losses) // max(self.epoch, 1), 1)
        return [
            float(np.mean(self.losses[i : i + per]))
            for i in range(0, len(self.losses), per)
        ]


def train_occupancy(
    config: RunConfig,
    dataset: OccupancyDataset,
    net: Optional[DenseUNet] = None,
    checkpoint_dir=None,
    epochs: Optional[int] = None,
    resume_from=None,
) -> StageTrainer:
    """Train the dense occupancy denoiser; returns the trainer (checkpoint
    on disk when checkpoint_dir is given)."""
    if dataset.resolution != config.coarse_resolution:
        raise ValueError(
            f"dataset/config mismatch: {dataset.resolution} != {config.coarse_resolution}"
        )
    net = DenseUNet(config.dense_config(), seed=config.seed) if net is None else net
    trainer = StageTrainer(net, config.occ_optimizer, config, "occupancy")
    if resume_from is not None:
        trainer.resume(resume_from)
    epochs = config.occ_optimizer.epochs if epochs is None else epochs
    batch = config.occ_optimizer.batch_size
    n = len(dataset)

    def denoiser(x_t, est, t, cond):
        return net(x_t, est, t, cond)

    net.train()
    for _ in range(trainer.epoch, epochs):
        order = trainer.rng.permutation(n)
        for start in range(0, n, batch):
            idx = order[start : start + batch]
            x0 = torch.from_numpy(
                np.stack([dataset.samples[i].x0 for i in idx])[:, None]
            )
            conds = [dataset.samples[i].cond for i in idx]
            if all(c is None for c in conds):
                conds = None
            trainer._step(denoiser, x0, conds, per_sample_t=True)
        trainer.epoch += 1
    net.eval()
    if checkpoint_dir is not None:
        trainer.save(checkpoint_dir)
    return trainer


def train_sdf(
    config: RunConfig,
    dataset: SdfDataset,
    net: Optional[SparseUNet] = None,
    checkpoint_dir=None,
    epochs: Optional[int] = None,
    resume_from=None,
) -> StageTrainer:
    """Train the sparse SDF denoiser (unconditioned)."""
    if dataset.resolution != config.fine_resolution:
        raise ValueError(
            f"dataset/config mismatch: {dataset.resolution} != {config.fine_resolution}"
        )
    net = SparseUNet(config.sparse_config(), seed=config.seed) if net is None else net
    trainer = StageTrainer(net, config.sdf_optimizer, config, "sdf")
    if resume_from is not None:
        trainer.resume(resume_from)
    epochs = config.sdf_optimizer.epochs if epochs is None else epochs
    batch = config.sdf_optimizer.batch_size
    n = len(dataset)

    net.train()
    for _ in range(trainer.epoch, epochs):
        order = trainer.rng.permutation(n)
        for start in range(0, n, batch):
            idx = order[start : start + batch]
            structures = [dataset.samples[i].structure for i in idx]
            structure = (
                structures[0] if len(structures) == 1 else concat_structures(structures)
            )
            x0 = torch.from_numpy(
                np.concatenate([dataset.samples[i].grid.values for i in idx])
            )

            def denoiser(x_t, est, t, cond, _s=structure):
                return net(x_t, est, t, _s)

            trainer._step(denoiser, x0, None)
        trainer.epoch += 1
    net.eval()
    if checkpoint_dir is not None:
        trainer.save(checkpoint_dir)
    return trainer
