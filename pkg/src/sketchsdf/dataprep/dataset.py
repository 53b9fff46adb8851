"""Sketch dataset assembly: view perturbation, per-shape sketch sets,
union augmentation, and the JSON-lines manifest."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..fields.ops import union_shapes
from ..fields.types import DenseField3D, TriangleMesh
from ..view_attention.cameras import CameraView, perturbed, predefined_views
from .render import render_shading
from .sketch import canny_sketch

log = logging.getLogger(__name__)

AZIMUTH_JITTER = 22.5
ELEVATION_JITTER = 5.0


@dataclass
class SketchRecord:
    shape_id: str
    sketch: np.ndarray  # 224x224 uint8, black strokes on white
    true_view: CameraView  # the perturbed view the sketch was rendered from
    view_bucket: str  # name of the predefined view it belongs to

    def validate(self) -> None:
        base = {v.name: v for v in predefined_views()}[self.view_bucket]
        if abs(self.true_view.azimuth - base.azimuth) > AZIMUTH_JITTER + 1e-9:
            raise ValueError("azimuth-perturbation-out-of-bounds")
        if abs(self.true_view.elevation - base.elevation) > ELEVATION_JITTER + 1e-9:
            raise ValueError("elevation-perturbation-out-of-bounds")


def perturb_view(base: CameraView, rng: np.random.Generator) -> CameraView:
    """Azimuth +- 22.5 deg, elevation +- 5 deg, everything else unchanged."""
    return perturbed(
        base,
        rng.uniform(-AZIMUTH_JITTER, AZIMUTH_JITTER),
        rng.uniform(-ELEVATION_JITTER, ELEVATION_JITTER),
    )


def sketch_from_mesh(mesh, view: CameraView) -> np.ndarray:
    return canny_sketch(render_shading(mesh, view))


def build_sketch_dataset(
    shapes: Sequence[Tuple[str, TriangleMesh]],
    perturbations_per_view: int = 10,
    rng: Optional[np.random.Generator] = None,
    views: Optional[Sequence[CameraView]] = None,
) -> List[SketchRecord]:
    """5 views x perturbations_per_view sketches per shape.

    Rendering happens under the perturbed view; the record keeps the
    unperturbed predefined view as its bucket (training conditions on the
    bucket). Failing shapes are skipped and logged.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    views = list(predefined_views()) if views is None else list(views)
    records: List[SketchRecord] = []
    for shape_id, mesh in shapes:
        try:
            for base in views:
                for _ in range(perturbations_per_view):
                    true_view = perturb_view(base, rng)
                    sketch = sketch_from_mesh(mesh, true_view)
                    records.append(
                        SketchRecord(shape_id, sketch, true_view, base.name)
                    )
        except Exception:
            log.exception("skipping shape %s after render failure", shape_id)
    return records


@dataclass
class AugmentedShape:
    field: DenseField3D
    source_ids: Tuple[int, int]
    translations: Tuple[np.ndarray, np.ndarray]


def build_augmented_shapes(
    fields: Sequence[DenseField3D],
    rng: np.random.Generator,
    count: Optional[int] = None,
    translation_range: float = 0.15,
) -> List[AugmentedShape]:
    """Union-of-two-shapes augmentation; one augmented field per input by default.

    Translations are uniform per axis in +-translation_range (the sampling
    law is a config choice; the default keeps both shapes inside the domain).
    """
    if len(fields) < 2:
        raise ValueError("need at least 2 shapes to augment")
    count = len(fields) if count is None else count
    out: List[AugmentedShape] = []
    for _ in range(count):
        i, j = rng.choice(len(fields), size=2, replace=False)
        t_i = rng.uniform(-translation_range, translation_range, size=3)
        t_j = rng.uniform(-translation_range, translation_range, size=3)
        merged = union_shapes(fields[i], fields[j], t_i, t_j)
        out.append(AugmentedShape(merged, (int(i), int(j)), (t_i, t_j)))
    return out


def union_sketch_mesh(
    mesh_a: TriangleMesh, mesh_b: TriangleMesh, t_a, t_b
) -> TriangleMesh:
    """Both translated meshes merged so they share one z-buffer when rendered."""
    va = mesh_a.vertices + np.asarray(t_a, dtype=np.float64)
    vb = mesh_b.vertices + np.asarray(t_b, dtype=np.float64)
    tris = np.concatenate(
        [mesh_a.triangles, mesh_b.triangles + len(va)], axis=0
    )
    return TriangleMesh(np.concatenate([va, vb], axis=0), tris)


def write_manifest(records: Sequence[dict], path) -> None:
    """JSON-lines manifest, one record per line, stable key order."""
    path = Path(path)
    with open(path, "w") as f:
        for rec in records:
            f.write(json.dumps(rec, sort_keys=True) + "\n")


def read_manifest(path) -> List[dict]:
    with open(path) as f:
        return [json.loads(line) for line in f if line.strip()]


def export_sketch_dataset(
    shapes: Sequence[Tuple[str, TriangleMesh, DenseField3D]],
    out_dir,
    coarse_resolution: int,
    perturbations_per_view: int = 10,
    rng: Optional[np.random.Generator] = None,
    views: Optional[Sequence[CameraView]] = None,
) -> Path:
    """Write the full on-disk dataset: sketch PNGs, SDF and occupancy fields
    in the LASF container, and a JSON-lines manifest.

    Each manifest line: {shape_id, view_bucket, true_view, sketch, sdf,
    occupancy} with paths relative to out_dir.
    """
    from PIL import Image

    from ..fields.io import write_field
    from ..fields.ops import derive_occupancy, shell_threshold_for

    out = Path(out_dir)
    (out / "sketches").mkdir(parents=True, exist_ok=True)
    (out / "fields").mkdir(exist_ok=True)
    rng = np.random.default_rng(0) if rng is None else rng
    records = []
    for shape_id, mesh, field in shapes:
        sdf_rel = f"fields/{shape_id}.sdf.lasf"
        occ_rel = f"fields/{shape_id}.occ.lasf"
        write_field(field, out / sdf_rel)
        occ = derive_occupancy(
            field, coarse_resolution, threshold=shell_threshold_for(field.resolution)
        )
        write_field(occ, out / occ_rel)
        sketch_records = build_sketch_dataset(
            [(shape_id, mesh)], perturbations_per_view, rng=rng, views=views
        )
        for k, rec in enumerate(sketch_records):
            sketch_rel = f"sketches/{shape_id}-{k:03d}.png"
            Image.fromarray(rec.sketch).save(out / sketch_rel)
            records.append(
                {
                    "shape_id": shape_id,
                    "view_bucket": rec.view_bucket,
                    "true_view": rec.true_view.to_dict(),
                    "sketch": sketch_rel,
                    "sdf": sdf_rel,
                    "occupancy": occ_rel,
                }
            )
    manifest = out / "manifest.jsonl"
    write_manifest(records, manifest)
    return manifest
