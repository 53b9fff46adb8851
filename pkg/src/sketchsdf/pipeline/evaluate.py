"""Evaluation protocols over generated shapes, with JSON/CSV reports."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..dataprep.dataset import sketch_from_mesh
from ..fields.types import DenseField3D, TriangleMesh
from ..metrics.fid import StubFeatureExtractor, shading_fid
from ..metrics.genmetrics import cov_mmd_1nna, retrieval_histogram
from ..metrics.pointsets import chamfer, emd_with_method, sample_mesh_points, voxel_iou
from ..metrics.report import EvaluationReport
from ..metrics.sketch_metrics import StubEmbeddingModel, clip_score, sketch_cd
from ..view_attention.cameras import CameraView

SAMPLE_POINTS = 2048
SAMPLE_SEED = 0


def evaluate_sketch_pairs(
    pairs: Sequence[dict],
    embedding_model=None,
) -> EvaluationReport:
    """Paired sketch-protocol metrics.

    Each pair: {"input_sketch": image, "gen_mesh": TriangleMesh,
    "view": CameraView, "gt_mesh": TriangleMesh (optional),
    "gen_occupancy"/"gt_occupancy": DenseField3D (optional)}.
    """
    if not pairs:
        raise ValueError("missing-pairs")
    model = StubEmbeddingModel() if embedding_model is None else embedding_model
    clip_scores, sketch_cds, cds, emds, ious = [], [], [], [], []
    emd_method = None
    empty = 0
    for pair in pairs:
        if pair["gen_mesh"].num_triangles == 0:
            empty += 1  # nothing to render or sample; recorded, not scored
            continue
        gen_sketch = sketch_from_mesh(pair["gen_mesh"], pair["view"])
        clip_scores.append(clip_score(pair["input_sketch"], gen_sketch, model))
        sketch_cds.append(sketch_cd(pair["input_sketch"], gen_sketch))
        gt = pair.get("gt_mesh")
        if gt is not None and gt.num_triangles:
            p = sample_mesh_points(pair["gen_mesh"], SAMPLE_POINTS, SAMPLE_SEED)
            q = sample_mesh_points(gt, SAMPLE_POINTS, SAMPLE_SEED)
            cds.append(chamfer(p, q))
            value, emd_method = emd_with_method(p, q)
            emds.append(value)
        if pair.get("gen_occupancy") is not None and pair.get("gt_occupancy") is not None:
            ious.append(voxel_iou(pair["gen_occupancy"], pair["gt_occupancy"]))
    if not clip_scores:
        raise ValueError("missing-pairs: every generated mesh is empty")

    fingerprint = getattr(model, "fingerprint", "custom")
    report = EvaluationReport(protocol="sketch")
    report.add("clip_score", float(np.mean(clip_scores)), extractor_id=fingerprint)
    report.add("sketch_cd", float(np.mean(sketch_cds)))
    if cds:
        report.add("cd", float(np.mean(cds)), seeds={"sampling": SAMPLE_SEED})
        report.add("emd", float(np.mean(emds)), seeds={"sampling": SAMPLE_SEED},
                   solver=emd_method)
    if ious:
        report.add("voxel_iou", float(np.mean(ious)))
    report.extra["num_pairs"] = len(pairs)
    report.extra["empty_generated"] = empty
    return report


def evaluate_category_sets(
    gen_meshes: Sequence[TriangleMesh],
    ref_meshes: Sequence[TriangleMesh],
    extractor=None,
    histogram_bins: int = 10,
) -> EvaluationReport:
    """Unpaired category-protocol metrics: shading FID, COV/MMD/1-NNA,
    nearest-shape retrieval histogram."""
    empty = sum(1 for m in gen_meshes if m.num_triangles == 0)
    gen_meshes = [m for m in gen_meshes if m.num_triangles > 0]
    if len(gen_meshes) < 2 or len(ref_meshes) < 2:
        raise ValueError("missing-pairs: need >= 2 non-empty meshes per side")
    extractor = StubFeatureExtractor() if extractor is None else extractor
    report = EvaluationReport(protocol="category")
    fid = shading_fid(gen_meshes, ref_meshes, extractor)
    report.add("shading_fid", fid, extractor_id=extractor.fingerprint)

    gen_pts = [sample_mesh_points(m, SAMPLE_POINTS, SAMPLE_SEED) for m in gen_meshes]
    ref_pts = [sample_mesh_points(m, SAMPLE_POINTS, SAMPLE_SEED) for m in ref_meshes]
    for base in ("CD", "EMD"):
        cov, mmd, nna = cov_mmd_1nna(gen_pts, ref_pts, base_metric=base)
        report.add(f"cov_{base.lower()}", cov, seeds={"sampling": SAMPLE_SEED})
        report.add(f"mmd_{base.lower()}", mmd, seeds={"sampling": SAMPLE_SEED})
        report.add(f"1nna_{base.lower()}", nna, seeds={"sampling": SAMPLE_SEED})

    counts, edges, nearest = retrieval_histogram(
        gen_meshes, ref_meshes, bins=histogram_bins,
        num_points=SAMPLE_POINTS, seed=SAMPLE_SEED,
    )
    report.extra["retrieval_histogram"] = {"counts": counts, "bin_edges": edges}
    report.extra["num_gen"] = len(gen_meshes)
    report.extra["num_ref"] = len(ref_meshes)
    return report


REPORT_SCHEMA = {
    "required": ["protocol", "metrics"],
    "metric_required": ["metric", "value", "convention"],
}


def validate_report(d: dict) -> None:
    """Structural check of a report dict; raises ValueError on violation."""
    for key in REPORT_SCHEMA["required"]:
        if key not in d:
            raise ValueError(f"report-schema: missing {key!r}")
    if d["protocol"] not in ("sketch", "category"):
        raise ValueError(f"report-schema: unknown protocol {d['protocol']!r}")
    if not isinstance(d["metrics"], list):
        raise ValueError("report-schema: metrics must be a list")
    for entry in d["metrics"]:
        for key in REPORT_SCHEMA["metric_required"]:
            if key not in entry:
                raise ValueError(f"report-schema: metric entry missing {key!r}")
        if not isinstance(entry["value"], (int, float)):
            raise ValueError("report-schema: metric value must be numeric")


def write_reports(report: EvaluationReport, run_dir) -> Path:
    reports_dir = Path(run_dir) / "reports"
    reports_dir.mkdir(parents=True, exist_ok=True)
    json_path = reports_dir / f"report-{report.protocol}.json"
    report.write_json(json_path)
    report.write_csv(reports_dir / f"report-{report.protocol}.csv")
    validate_report(json.loads(json_path.read_text()))
    return json_path


def evaluate_run(
    run_dir,
    protocol: str,
    shapes,
    num_gen: int = 8,
    embedding_model=None,
    extractor=None,
) -> EvaluationReport:
    """Evaluate a trained run directory against reference shapes.

    sketch protocol: renders front-view sketches for the first ``num_gen``
    shapes, generates conditioned on them, and scores the pairs. category
    protocol: generates ``num_gen`` unconditional shapes and scores the sets.
    Reports land under run_dir/reports/.
    """
    from ..denoiser.checkpoint import load_checkpoint
    from ..view_attention.cameras import view_by_name
    from ..view_attention.encoder import StubPatchEncoder
    from .config import RunConfig
    from .datasets import occupancy_of
    from .generate import generate, sketch_conditioning

    run_dir = Path(run_dir)
    cfg = RunConfig.load(run_dir / "config.json")
    occ_net, _ = load_checkpoint(run_dir / "checkpoints" / "occ")
    sdf_net, _ = load_checkpoint(run_dir / "checkpoints" / "sdf")

    if protocol == "category":
        gen = [
            generate(occ_net, sdf_net, seed=s, steps=cfg.sampler.steps).mesh
            for s in range(num_gen)
        ]
        ref = [s.mesh() for s in shapes[: max(2 * num_gen, 8)]]
        report = evaluate_category_sets(gen, ref, extractor=extractor)
    elif protocol == "sketch":
        encoder = StubPatchEncoder(cfg.patch_feature_dim, seed=cfg.encoder_seed)
        view = view_by_name("front")
        pairs = []
        for i, shape in enumerate(shapes[:num_gen]):
            sketch = sketch_from_mesh(shape.mesh(), view)
            cond = sketch_conditioning(sketch, "front", encoder, cfg.sketch_mode)
            result = generate(
                occ_net, sdf_net, cond=cond, seed=i,
                steps=cfg.sampler.steps, guidance=cfg.sampler.guidance,
            )
            pairs.append(
                {
                    "input_sketch": sketch,
                    "gen_mesh": result.mesh,
                    "view": view,
                    "gt_mesh": shape.mesh(),
                    "gen_occupancy": result.occupancy,
                    "gt_occupancy": occupancy_of(shape.field, cfg.coarse_resolution),
                }
            )
        report = evaluate_sketch_pairs(pairs, embedding_model=embedding_model)
    else:
        raise ValueError(f"unknown-protocol: {protocol!r}")
    write_reports(report, run_dir)
    return report
