"""Two-stage inference: occupancy sampling, shell subdivision, sparse SDF
sampling, completion, and mesh extraction."""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import torch
from scipy import ndimage

from .. import diffusion
from ..denoiser.conditioning import Conditioning
from ..denoiser.dense_unet import DenseUNet
from ..denoiser.sparse_unet import SparseUNet, structure_for
from ..fields.ops import denormalize_sparse_sdf, subdivide_occupied
from ..fields.types import DenseField3D, SparseVoxelGrid, TriangleMesh
from ..mesh.complete import complete_field
from ..mesh.extract import marching_cubes_dual
from ..view_attention.cameras import view_by_name
from ..view_attention.encoder import PatchEncoder, encode_sketch


class EmptyGenerationError(RuntimeError):
    """Stage 1 produced an empty shell; carries the raw field for diagnosis."""

    def __init__(self, raw_field: DenseField3D):
        super().__init__("empty-generation: no voxel above the 0.5 threshold")
        self.raw_field = raw_field


@dataclass
class GenerationResult:
    occupancy: DenseField3D
    sparse: SparseVoxelGrid  # de-normalized SDF values on the shell
    completed: DenseField3D
    mesh: TriangleMesh
    watertight: bool
    warnings: List[str] = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    seed: int = 0


def sketch_conditioning(
    sketch: np.ndarray,
    view_name: str,
    encoder: PatchEncoder,
    mode: str = "view_aware_local",
) -> Conditioning:
    """Build sketch conditioning from a uint8 (or [0,1]) image and a view name."""
    img = np.asarray(sketch, dtype=np.float32)
    if img.max() > 1.5:
        img = img / 255.0
    patches = encode_sketch(img, encoder)
    return Conditioning(
        kind="sketch", patches=patches, view=view_by_name(view_name), mode=mode
    )


def sample_occupancy(
    occ_net: DenseUNet,
    cond: Optional[Conditioning] = None,
    rng: Optional[np.random.Generator] = None,
    steps: int = 50,
    guidance: float = 1.0,
    method: str = "ddpm",
) -> DenseField3D:
    """Stage 1 alone: sample an occupancy field (threshold 0.5).

    Raises EmptyGenerationError (with the raw prediction attached) when no
    voxel clears the threshold.
    """
    rng = np.random.default_rng() if rng is None else rng
    r = occ_net.cfg.resolution

    def dense_denoiser(x, sc, t, c):
        with torch.no_grad():
            out = occ_net(
                torch.as_tensor(x, dtype=torch.float32)[None, None],
                torch.as_tensor(sc, dtype=torch.float32)[None, None],
                float(t),
                [c] if c is not None else None,
            )
        return out[0, 0].numpy().astype(np.float64)

    raw = diffusion.ddpm_sample(
        dense_denoiser,
        (r, r, r),
        steps=steps,
        cond=cond,
        guidance_scale=guidance,
        rng=rng,
        clamp_range=(0.0, 1.0),
        null_cond=cond.as_null() if cond is not None else None,
        method=method,
    )
    occ_values = (raw > 0.5).astype(np.float32)
    if not occ_values.any():
        raise EmptyGenerationError(DenseField3D(r, raw.astype(np.float32), kind="sdf"))
    return DenseField3D(r, occ_values, kind="occupancy")


def generate(
    occ_net: DenseUNet,
    sdf_net: SparseUNet,
    cond: Optional[Conditioning] = None,
    seed: int = 0,
    steps: int = 50,
    guidance: float = 1.0,
    dilate_shell: bool = False,
    method: str = "ddpm",
) -> GenerationResult:
    """Run both diffusion stages; deterministic for a fixed seed."""
    rng = np.random.default_rng(seed)
    t0 = time.time()
    occupancy = sample_occupancy(
        occ_net, cond=cond, rng=rng, steps=steps, guidance=guidance, method=method
    )
    t_occ = time.time() - t0
    if dilate_shell:
        occupancy = DenseField3D(
            occupancy.resolution,
            ndimage.binary_dilation(
                occupancy.values > 0.5, ndimage.generate_binary_structure(3, 1)
            ).astype(np.float32),
            kind="occupancy",
        )

    t1 = time.time()
    grid = subdivide_occupied(occupancy)
    structure = structure_for(grid, sdf_net.cfg)

    def sparse_denoiser(x, sc, t, c):
        with torch.no_grad():
            out = sdf_net(
                torch.as_tensor(x, dtype=torch.float32),
                torch.as_tensor(sc, dtype=torch.float32),
                float(t),
                structure,
            )
        return out.numpy().astype(np.float64)

    values = diffusion.ddpm_sample(
        sparse_denoiser,
        (len(grid),),
        steps=steps,
        cond=None,
        rng=rng,
        clamp_range=(-1.0, 1.0),
        method=method,
    )
    sparse = denormalize_sparse_sdf(grid.with_values(values.astype(np.float32)))
    t_sdf = time.time() - t1

    t2 = time.time()
    warn_messages: List[str] = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        completed = complete_field(sparse)
        mesh = marching_cubes_dual(completed)
        warn_messages = [str(w.message) for w in caught]
    watertight = mesh.is_watertight()
    if not watertight and mesh.num_triangles > 0:
        warn_messages.append("non-watertight-extraction")
    return GenerationResult(
        occupancy=occupancy,
        sparse=sparse,
        completed=completed,
        mesh=mesh,
        watertight=watertight,
        warnings=warn_messages,
        timings={
            "occupancy_s": t_occ,
            "sdf_s": t_sdf,
            "extract_s": time.time() - t2,
        },
        seed=seed,
    )


def shell_components(occ: DenseField3D) -> tuple:
    """(num_components, largest_fraction) under 6-connectivity."""
    mask = occ.values > 0.5
    if not mask.any():
        return 0, 0.0
    labels, num = ndimage.label(mask, structure=ndimage.generate_binary_structure(3, 1))
    sizes = np.bincount(labels.reshape(-1))[1:]
    return int(num), float(sizes.max() / sizes.sum())
