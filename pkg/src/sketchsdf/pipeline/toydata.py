"""Procedural toy shapes so training and evaluation run self-contained.

Shapes are analytic SDF fields (spheres, boxes, ellipsoids, and unions)
with moderate parameter jitter around shared canonical poses; meshes come
from dual-grid extraction of the fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..fields.types import DenseField3D, TriangleMesh, cell_center_grid
from ..mesh.extract import marching_cubes_dual

KINDS = ("sphere", "box", "ellipsoid", "union")


def _sphere(pts, radius, center):
    return np.linalg.norm(pts - center, axis=-1) - radius


def _box(pts, half, center):
    q = np.abs(pts - center) - half
    outside = np.linalg.norm(np.maximum(q, 0.0), axis=-1)
    inside = np.minimum(q.max(axis=-1), 0.0)
    return outside + inside


def _ellipsoid(pts, radii, center):
    p = pts - center
    k0 = np.linalg.norm(p / radii, axis=-1)
    k1 = np.linalg.norm(p / (radii * radii), axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(k1 > 0, k0 * (k0 - 1.0) / k1, -radii.min())


@dataclass
class ToyShape:
    shape_id: str
    kind: str
    field: DenseField3D  # fine-resolution SDF
    params: dict

    _mesh: Optional[TriangleMesh] = None

    def mesh(self) -> TriangleMesh:
        if self._mesh is None:
            self._mesh = marching_cubes_dual(self.field)
        return self._mesh


def _sample_params(kind: str, rng: np.random.Generator) -> dict:
    center = rng.uniform(-0.12, 0.12, size=3)
    if kind == "sphere":
        return {"radius": rng.uniform(0.35, 0.55), "center": center}
    if kind == "box":
        return {"half": rng.uniform(0.28, 0.5, size=3), "center": center}
    if kind == "ellipsoid":
        return {"radii": rng.uniform(0.28, 0.55, size=3), "center": center}
    if kind == "union":
        a = _sample_params(rng.choice(["sphere", "box"]), rng)
        b = _sample_params(rng.choice(["sphere", "ellipsoid"]), rng)
        return {"a": a, "b": b}
    raise ValueError(f"unknown-kind: {kind}")


def _evaluate(kind: str, params: dict, pts: np.ndarray) -> np.ndarray:
    if kind == "sphere":
        return _sphere(pts, params["radius"], np.asarray(params["center"]))
    if kind == "box":
        return _box(pts, np.asarray(params["half"]), np.asarray(params["center"]))
    if kind == "ellipsoid":
        return _ellipsoid(pts, np.asarray(params["radii"]), np.asarray(params["center"]))
    if kind == "union":
        pa = params["a"]
        pb = params["b"]
        ka = "sphere" if "radius" in pa else "box"
        kb = "sphere" if "radius" in pb else "ellipsoid"
        return np.minimum(_evaluate(ka, pa, pts), _evaluate(kb, pb, pts))
    raise ValueError(f"unknown-kind: {kind}")


def make_toy_shapes(
    count: int,
    fine_resolution: int = 32,
    seed: int = 0,
    kinds: Sequence[str] = KINDS,
) -> List[ToyShape]:
    rng = np.random.default_rng(seed)
    pts = cell_center_grid(fine_resolution)
    shapes = []
    for i in range(count):
        kind = kinds[i % len(kinds)]
        params = _sample_params(kind, rng)
        values = _evaluate(kind, params, pts).astype(np.float32)
        field = DenseField3D(fine_resolution, values, kind="sdf")
        shapes.append(ToyShape(f"toy-{i:04d}", kind, field, params))
    return shapes


def _bars_field(
    pts: np.ndarray,
    k: int,
    total_width: float,
    height: float,
    depth: float,
    x_offset: float,
    y_offset: float,
) -> np.ndarray:
    """k vertical bars spread along x, sharing the same total material width
    so bar count changes layout, not overall mass."""
    bar_w = total_width / k
    xs = np.linspace(-0.55, 0.55, k) + x_offset
    half = np.array([bar_w / 2.0, height / 2.0, depth / 2.0])
    out = None
    for x in xs:
        d = _box(pts, half, np.array([x, y_offset, 0.0]))
        out = d if out is None else np.minimum(out, d)
    return out


def make_bar_shapes(
    count_per_class: int,
    fine_resolution: int = 32,
    seed: int = 0,
    bar_counts: Tuple[int, int] = (2, 4),
) -> Tuple[List[ToyShape], List[int]]:
    """Two-class dataset: shapes with k vs. k+2 bars, jittered, equal mass."""
    rng = np.random.default_rng(seed)
    pts = cell_center_grid(fine_resolution)
    shapes: List[ToyShape] = []
    labels: List[int] = []
    for label, k in enumerate(bar_counts):
        for i in range(count_per_class):
            params = {
                "k": k,
                "total_width": 0.36 * rng.uniform(0.92, 1.08),
                "height": rng.uniform(0.95, 1.25),
                "depth": rng.uniform(0.10, 0.16),
                "x_offset": rng.uniform(-0.05, 0.05),
                "y_offset": rng.uniform(-0.05, 0.05),
            }
            values = _bars_field(pts, **params).astype(np.float32)
            shapes.append(
                ToyShape(
                    f"bars{k}-{i:03d}",
                    f"bars{k}",
                    DenseField3D(fine_resolution, values, kind="sdf"),
                    params,
                )
            )
            labels.append(label)
    return shapes, labels


def bar_template_field(
    k: int, fine_resolution: int = 32
) -> DenseField3D:
    """Canonical (jitter-free) k-bar SDF used as a classification template."""
    pts = cell_center_grid(fine_resolution)
    values = _bars_field(
        pts, k, total_width=0.36, height=1.1, depth=0.13, x_offset=0.0, y_offset=0.0
    ).astype(np.float32)
    return DenseField3D(fine_resolution, values, kind="sdf")
