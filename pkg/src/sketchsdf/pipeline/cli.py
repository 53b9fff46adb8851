"""Command-line entry points: prep, train-occ, train-sdf, sample, eval, serve."""

from __future__ import annotations

import json
from pathlib import Path

import click
import numpy as np

from ..fields.io import read_field, write_field
from ..denoiser.checkpoint import load_checkpoint
from ..mesh.objio import export_obj
from ..view_attention.encoder import StubPatchEncoder
from .config import RunConfig, apply_env_overrides
from .datasets import build_occupancy_dataset, build_sdf_dataset
from .evaluate import evaluate_run
from .generate import generate, sketch_conditioning
from .toydata import ToyShape, make_toy_shapes
from .train import train_occupancy, train_sdf


def _load_config(config_path, **overrides) -> RunConfig:
    cfg = RunConfig.load(config_path) if config_path else RunConfig()
    cfg = apply_env_overrides(cfg)
    if overrides:
        d = cfg.to_dict()
        d.update({k: v for k, v in overrides.items() if v is not None})
        cfg = RunConfig.from_dict(d)
    return cfg


def _run_dir(cfg: RunConfig) -> Path:
    run_dir = Path(cfg.run_dir or "run")
    run_dir.mkdir(parents=True, exist_ok=True)
    cfg.save(run_dir / "config.json")
    return run_dir


def _load_shapes(dataset_dir: Path) -> list:
    manifest = json.loads((dataset_dir / "shapes.json").read_text())
    shapes = []
    for entry in manifest:
        f = read_field(dataset_dir / entry["field"])
        shapes.append(ToyShape(entry["id"], entry["kind"], f, entry.get("params", {})))
    return shapes


@click.group()
def main():
    """Two-stage voxel SDF diffusion toolkit."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--count", default=200, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def prep(config_path, count, out_dir):
    """Generate the procedural toy dataset (fields + manifest)."""
    cfg = _load_config(config_path)
    out = Path(out_dir)
    (out / "fields").mkdir(parents=True, exist_ok=True)
    shapes = make_toy_shapes(count, cfg.fine_resolution, seed=cfg.seed)
    manifest = []
    for s in shapes:
        rel = f"fields/{s.shape_id}.lasf"
        write_field(s.field, out / rel)
        manifest.append({"id": s.shape_id, "kind": s.kind, "field": rel})
    (out / "shapes.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    click.echo(f"wrote {len(shapes)} shapes to {out}")


@main.command("train-occ")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--dataset", "dataset_dir", required=True, type=click.Path(exists=True))
@click.option("--run-dir", default=None, type=click.Path())
@click.option("--epochs", default=None, type=int)
def train_occ_cmd(config_path, dataset_dir, run_dir, epochs):
    """Train the occupancy-diffusion stage."""
    cfg = _load_config(config_path, run_dir=run_dir, dataset_dir=dataset_dir)
    rd = _run_dir(cfg)
    shapes = _load_shapes(Path(dataset_dir))
    encoder = (
        StubPatchEncoder(cfg.patch_feature_dim, seed=cfg.encoder_seed)
        if cfg.conditioning == "sketch"
        else None
    )
    dataset = build_occupancy_dataset(
        shapes,
        cfg.coarse_resolution,
        encoder=encoder,
        sketch_mode=cfg.sketch_mode,
        sketches_per_shape=5 if cfg.conditioning == "sketch" else 0,
        rng=np.random.default_rng(cfg.seed),
    )
    trainer = train_occupancy(
        cfg, dataset, checkpoint_dir=rd / "checkpoints" / "occ", epochs=epochs
    )
    click.echo(
        f"occupancy stage: {trainer.epoch} epochs, final loss "
        f"{trainer.losses[-1]:.4f}, baseline {dataset.zero_predictor_loss():.4f}"
    )


@main.command("train-sdf")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--dataset", "dataset_dir", required=True, type=click.Path(exists=True))
@click.option("--run-dir", default=None, type=click.Path())
@click.option("--epochs", default=None, type=int)
def train_sdf_cmd(config_path, dataset_dir, run_dir, epochs):
    """Train the SDF-diffusion stage."""
    cfg = _load_config(config_path, run_dir=run_dir, dataset_dir=dataset_dir)
    rd = _run_dir(cfg)
    shapes = _load_shapes(Path(dataset_dir))
    dataset = build_sdf_dataset(
        shapes, cfg.coarse_resolution, num_levels=len(cfg.sparse_levels)
    )
    trainer = train_sdf(
        cfg, dataset, checkpoint_dir=rd / "checkpoints" / "sdf", epochs=epochs
    )
    click.echo(
        f"sdf stage: {trainer.epoch} epochs, final loss {trainer.losses[-1]:.4f}, "
        f"baseline {dataset.zero_predictor_loss():.4f}"
    )


@main.command()
@click.option("--run-dir", required=True, type=click.Path(exists=True))
@click.option("--seed", default=0, show_default=True)
@click.option("--steps", default=None, type=int)
@click.option("--guidance", default=None, type=float)
@click.option("--sketch", "sketch_path", default=None, type=click.Path(exists=True))
@click.option("--view", "view_name", default="front", show_default=True)
@click.option("--out", "out_path", default=None, type=click.Path())
def sample(run_dir, seed, steps, guidance, sketch_path, view_name, out_path):
    """Generate one shape from the trained checkpoints."""
    rd = Path(run_dir)
    cfg = RunConfig.load(rd / "config.json")
    occ_net, _ = load_checkpoint(rd / "checkpoints" / "occ")
    sdf_net, _ = load_checkpoint(rd / "checkpoints" / "sdf")
    cond = None
    if sketch_path:
        from PIL import Image

        img = np.asarray(Image.open(sketch_path).convert("L"))
        encoder = StubPatchEncoder(cfg.patch_feature_dim, seed=cfg.encoder_seed)
        cond = sketch_conditioning(img, view_name, encoder, cfg.sketch_mode)
    result = generate(
        occ_net,
        sdf_net,
        cond=cond,
        seed=seed,
        steps=steps or cfg.sampler.steps,
        guidance=guidance if guidance is not None else
        (cfg.sampler.guidance if cond is not None else 1.0),
        dilate_shell=cfg.dilate_predicted_shell,
        method=cfg.sampler.method,
    )
    out = Path(out_path) if out_path else rd / "samples" / f"sample-{seed}.obj"
    out.parent.mkdir(parents=True, exist_ok=True)
    export_obj(result.mesh, out)
    click.echo(
        f"mesh: {out} ({result.mesh.num_triangles} tris, watertight={result.watertight},"
        f" warnings={result.warnings})"
    )


@main.command("eval")
@click.option("--run-dir", required=True, type=click.Path(exists=True))
@click.option("--dataset", "dataset_dir", required=True, type=click.Path(exists=True))
@click.option("--protocol", type=click.Choice(["sketch", "category"]), default="category")
@click.option("--num-gen", default=8, show_default=True)
def eval_cmd(run_dir, dataset_dir, protocol, num_gen):
    """Evaluate generated samples against the dataset."""
    shapes = _load_shapes(Path(dataset_dir))
    report = evaluate_run(run_dir, protocol, shapes, num_gen=num_gen)
    click.echo(f"report: {Path(run_dir) / 'reports' / f'report-{protocol}.json'}")
    for entry in report.entries:
        click.echo(f"  {entry.metric}: {entry.value:.4f}")


@main.command()
@click.option("--run-dir", required=True, type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8008, show_default=True)
def serve(run_dir, host, port):
    """Serve the generation HTTP API."""
    import uvicorn

    from ..service.app import create_app_from_run_dir

    app = create_app_from_run_dir(run_dir)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
