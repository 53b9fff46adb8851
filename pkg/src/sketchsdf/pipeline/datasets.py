"""Training-set assembly for both diffusion stages."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..denoiser.conditioning import Conditioning
from ..denoiser.sparse_unet import SparseStructure
from ..dataprep.dataset import perturb_view, sketch_from_mesh
from ..fields.ops import (
    derive_occupancy,
    restrict_to_sparse,
    shell_threshold_for,
    subdivide_occupied,
)
from ..fields.types import DenseField3D, SparseVoxelGrid
from ..view_attention.cameras import CameraView, predefined_views
from ..view_attention.encoder import PatchEncoder
from .toydata import ToyShape


@dataclass
class OccupancySample:
    shape_id: str
    x0: np.ndarray  # (R, R, R) float32 in {0, 1}
    cond: Optional[Conditioning] = None
    sketch: Optional[np.ndarray] = None
    view_bucket: Optional[str] = None


@dataclass
class OccupancyDataset:
    resolution: int
    samples: List[OccupancySample]

    def __len__(self) -> int:
        return len(self.samples)

    def zero_predictor_loss(self) -> float:
        """MSE of the constant-zero predictor: mean of x0^2 over the set."""
        return float(np.mean([np.mean(s.x0**2) for s in self.samples]))


@dataclass
class SdfSample:
    shape_id: str
    grid: SparseVoxelGrid  # normalized [-1, 1] target values
    structure: SparseStructure


@dataclass
class SdfDataset:
    resolution: int
    samples: List[SdfSample]

    def __len__(self) -> int:
        return len(self.samples)

    def zero_predictor_loss(self) -> float:
        return float(np.mean([np.mean(s.grid.values**2) for s in self.samples]))


def occupancy_of(shape_field: DenseField3D, coarse_resolution: int) -> DenseField3D:
    return derive_occupancy(
        shape_field,
        coarse_resolution,
        threshold=shell_threshold_for(shape_field.resolution),
    )


def build_occupancy_dataset(
    shapes: Sequence[ToyShape],
    coarse_resolution: int,
    encoder: Optional[PatchEncoder] = None,
    sketch_mode: str = "view_aware_local",
    sketches_per_shape: int = 0,
    views: Optional[Sequence[CameraView]] = None,
    rng: Optional[np.random.Generator] = None,
    extra_fields: Sequence[Tuple[str, DenseField3D]] = (),
) -> OccupancyDataset:
    """Occupancy targets, optionally paired with sketch conditionings.

    With sketches_per_shape > 0, each shape contributes that many sketch
    records, rendered under perturbed views but conditioned on the bucket's
    canonical view. ``extra_fields`` appends unconditioned entries
    (e.g. union-augmented shapes).
    """
    rng = np.random.default_rng(0) if rng is None else rng
    views = list(predefined_views()) if views is None else list(views)
    samples: List[OccupancySample] = []
    for shape in shapes:
        occ = occupancy_of(shape.field, coarse_resolution)
        if sketches_per_shape <= 0 or encoder is None:
            samples.append(OccupancySample(shape.shape_id, occ.values))
            continue
        mesh = shape.mesh()
        for s in range(sketches_per_shape):
            bucket = views[s % len(views)]
            true_view = perturb_view(bucket, rng)
            sketch = sketch_from_mesh(mesh, true_view)
            patches = encoder(sketch.astype(np.float32) / 255.0)
            cond = Conditioning(
                kind="sketch", patches=patches, view=bucket, mode=sketch_mode
            )
            samples.append(
                OccupancySample(shape.shape_id, occ.values, cond, sketch, bucket.name)
            )
    for name, f in extra_fields:
        occ = occupancy_of(f, coarse_resolution)
        samples.append(OccupancySample(name, occ.values))
    return OccupancyDataset(coarse_resolution, samples)


def build_sdf_dataset(
    shapes: Sequence[ToyShape],
    coarse_resolution: int,
    num_levels: int = 3,
) -> SdfDataset:
    """Sparse normalized-SDF targets on ground-truth shells, with cached
    network structures."""
    samples = []
    for shape in shapes:
        occ = occupancy_of(shape.field, coarse_resolution)
        grid = subdivide_occupied(occ)
        grid = restrict_to_sparse(shape.field, grid)
        structure = SparseStructure(grid.coords, grid.resolution, num_levels)
        samples.append(SdfSample(shape.shape_id, grid, structure))
    return SdfDataset(shapes[0].field.resolution, samples)
