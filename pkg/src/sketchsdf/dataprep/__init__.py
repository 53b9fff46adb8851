from .dataset import (
    AugmentedShape,
    SketchRecord,
    build_augmented_shapes,
    build_sketch_dataset,
    export_sketch_dataset,
    perturb_view,
    read_manifest,
    sketch_from_mesh,
    union_sketch_mesh,
    write_manifest,
)
from .render import render_shading, vertex_normals
from .sketch import canny_sketch, stroke_pixels

__all__ = [
    "AugmentedShape",
    "SketchRecord",
    "build_augmented_shapes",
    "build_sketch_dataset",
    "export_sketch_dataset",
    "canny_sketch",
    "perturb_view",
    "read_manifest",
    "render_shading",
    "sketch_from_mesh",
    "stroke_pixels",
    "union_sketch_mesh",
    "vertex_normals",
    "write_manifest",
]
