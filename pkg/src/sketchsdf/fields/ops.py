"""Field conversions: occupancy derivation, subdivision, sparse restriction, unions.

SDF normalization convention used for diffusion training targets: raw values
are clamped to +-3h (h = fine-grid spacing) and scaled by 1/(3h) so targets
lie in [-1, 1]. The surface shell threshold (|v| <= 1/32 at the reference
128^3 scale, i.e. two fine cells) lies strictly inside the clamp band.
"""

from __future__ import annotations

import numpy as np

from .types import MAX_SDF, DenseField3D, SparseVoxelGrid, cell_center_grid

# Shell threshold at the reference 128^3 fine resolution (two fine cells).
SHELL_THRESHOLD = 1.0 / 32.0
# Clamp band half-width in units of fine-grid spacing h.
CLAMP_BAND_CELLS = 3.0


def shell_threshold_for(resolution: int) -> float:
    """Shell threshold scaled to a fine grid: two cells of spacing 2/resolution."""
    return 2.0 * (2.0 / resolution)


def clamp_band(resolution: int) -> float:
    """Half-width of the SDF clamp band (+-3h) for a fine grid."""
    return CLAMP_BAND_CELLS * (2.0 / resolution)


def derive_occupancy(
    fine_sdf: DenseField3D, coarse_resolution: int, threshold: float = SHELL_THRESHOLD
) -> DenseField3D:
    """Coarse surface-occupancy from a fine SDF.

    A coarse cell is occupied iff any of its 8 children stores |v| <= threshold.
    """
    if fine_sdf.resolution != 2 * coarse_resolution:
        raise ValueError(
            f"resolution-mismatch: fine {fine_sdf.resolution} != 2 x {coarse_resolution}"
        )
    near = np.abs(fine_sdf.values) <= threshold
    m = coarse_resolution
    blocks = near.reshape(m, 2, m, 2, m, 2)
    occ = blocks.any(axis=(1, 3, 5)).astype(np.float32)
    return DenseField3D(coarse_resolution, occ, kind="occupancy")


def occupancy_from_sdf(sdf: DenseField3D, delta: float) -> DenseField3D:
    """Same-resolution thin-shell occupancy: 1 where |g(z)| <= delta."""
    if delta <= 0:
        raise ValueError(f"invalid-threshold: delta={delta}")
    occ = (np.abs(sdf.values) <= delta).astype(np.float32)
    return DenseField3D(sdf.resolution, occ, kind="occupancy")


def subdivide_occupied(occ: DenseField3D) -> SparseVoxelGrid:
    """Split every occupied coarse cell into its 8 fine children (values 0)."""
    parents = np.argwhere(occ.values > 0.5)
    if len(parents) == 0:
        raise ValueError("empty-shell")
    offsets = np.array(
        [[i, j, k] for i in (0, 1) for j in (0, 1) for k in (0, 1)], dtype=np.int64
    )
    children = (parents[:, None, :] * 2 + offsets[None, :, :]).reshape(-1, 3)
    return SparseVoxelGrid(
        occ.resolution * 2, children, np.zeros(len(children), dtype=np.float32)
    )


def restrict_to_sparse(fine_sdf: DenseField3D, grid: SparseVoxelGrid) -> SparseVoxelGrid:
    """Copy SDF values onto the sparse coords, clamped to +-3h and scaled to [-1, 1]."""
    if fine_sdf.resolution != grid.resolution:
        raise ValueError(
            f"resolution-mismatch: {fine_sdf.resolution} != {grid.resolution}"
        )
    band = clamp_band(grid.resolution)
    c = grid.coords
    raw = fine_sdf.values[c[:, 0], c[:, 1], c[:, 2]]
    normalized = np.clip(raw, -band, band) / band
    return grid.with_values(normalized.astype(np.float32))


def denormalize_sparse_sdf(grid: SparseVoxelGrid) -> SparseVoxelGrid:
    """Inverse of the restrict_to_sparse scaling: [-1,1] back to raw +-3h values."""
    band = clamp_band(grid.resolution)
    return grid.with_values(np.clip(grid.values, -1.0, 1.0) * band)


def resample_trilinear(field: DenseField3D, points: np.ndarray) -> np.ndarray:
    """Trilinear sample of a dense field at world points; outside -> +MAX_SDF."""
    n = field.resolution
    h = field.spacing
    # Continuous cell-index coordinates: center i sits at index i.
    idx = (np.asarray(points, dtype=np.float64) + 1.0) / h - 0.5
    i0 = np.floor(idx).astype(np.int64)
    frac = idx - i0
    acc = np.zeros(len(points), dtype=np.float64)
    inside_any = np.zeros(len(points), dtype=bool)
    for dx in (0, 1):
        for dy in (0, 1):
            for dz in (0, 1):
                ci = i0 + np.array([dx, dy, dz])
                w = (
                    np.where(dx, frac[:, 0], 1 - frac[:, 0])
                    * np.where(dy, frac[:, 1], 1 - frac[:, 1])
                    * np.where(dz, frac[:, 2], 1 - frac[:, 2])
                )
                valid = np.all((ci >= 0) & (ci < n), axis=1)
                ci_c = np.clip(ci, 0, n - 1)
                v = field.values[ci_c[:, 0], ci_c[:, 1], ci_c[:, 2]]
                contrib = np.where(valid, v, MAX_SDF)
                acc += w * contrib
                inside_any |= valid & (w > 0)
    # Fully outside the center lattice: report the far value exactly.
    acc[~inside_any] = MAX_SDF
    return acc


def union_shapes(
    sdf_a: DenseField3D, sdf_b: DenseField3D, t_a, t_b
) -> DenseField3D:
    """Pointwise-min union of two translated SDF fields (trilinear resampling).

    The min of two SDFs is exact outside both shapes and a conservative
    approximation inside; downstream shell-occupancy use only needs the
    near-surface band.
    """
    if sdf_a.resolution != sdf_b.resolution:
        raise ValueError(
            f"resolution-mismatch: {sdf_a.resolution} != {sdf_b.resolution}"
        )
    t_a = np.asarray(t_a, dtype=np.float64)
    t_b = np.asarray(t_b, dtype=np.float64)
    for t in (t_a, t_b):
        if np.any(np.abs(t) > 0.2 + 1e-12):
            raise ValueError(f"out-of-domain: translation {t} exceeds +-0.2")
    n = sdf_a.resolution
    centers = None

    def sampled(field: DenseField3D, t: np.ndarray) -> np.ndarray:
        nonlocal centers
        if np.all(t == 0.0):  # bitwise-exact identity path
            return field.values.reshape(-1).astype(np.float64)
        if centers is None:
            centers = cell_center_grid(n).reshape(-1, 3)
        return resample_trilinear(field, centers - t)

    va = sampled(sdf_a, t_a)
    vb = sampled(sdf_b, t_b)
    out = np.minimum(va, vb).reshape(n, n, n).astype(np.float32)
    return DenseField3D(n, out, kind="sdf")
