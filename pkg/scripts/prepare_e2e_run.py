"""Train tiny toy checkpoints for the studio e2e session and write a run dir."""

import sys
from pathlib import Path

import torch

torch.set_num_threads(2)

from sketchsdf.pipeline import (
    RunConfig,
    build_occupancy_dataset,
    build_sdf_dataset,
    make_toy_shapes,
    train_occupancy,
    train_sdf,
)
from sketchsdf.pipeline.config import OptimizerConfig, SamplerConfig


def main(run_dir: str) -> None:
    run = Path(run_dir)
    cfg = RunConfig(
        seed=0,
        occ_optimizer=OptimizerConfig("adam", 1e-3, 10, 8),
        sdf_optimizer=OptimizerConfig("adamw", 1e-3, 3, 8),
        sampler=SamplerConfig(steps=12, guidance=1.0),
        run_dir=str(run),
    )
    run.mkdir(parents=True, exist_ok=True)
    cfg.save(run / "config.json")
    shapes = make_toy_shapes(24, cfg.fine_resolution, seed=0)
    train_occupancy(
        cfg, build_occupancy_dataset(shapes, cfg.coarse_resolution),
        checkpoint_dir=run / "checkpoints" / "occ",
    )
    train_sdf(
        cfg, build_sdf_dataset(shapes, cfg.coarse_resolution),
        checkpoint_dir=run / "checkpoints" / "sdf",
    )
    print(f"e2e run dir ready: {run}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "/tmp/sketchsdf-e2e-run")
