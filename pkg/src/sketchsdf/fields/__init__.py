from .io import read_field, write_field
from .meshsdf import mesh_to_sdf, normalize_mesh, unsigned_distance_field
from .ops import (
    SHELL_THRESHOLD,
    clamp_band,
    denormalize_sparse_sdf,
    derive_occupancy,
    occupancy_from_sdf,
    resample_trilinear,
    restrict_to_sparse,
    shell_threshold_for,
    subdivide_occupied,
    union_shapes,
)
from .types import MAX_SDF, DenseField3D, SparseVoxelGrid, TriangleMesh

__all__ = [
    "MAX_SDF",
    "SHELL_THRESHOLD",
    "DenseField3D",
    "SparseVoxelGrid",
    "TriangleMesh",
    "clamp_band",
    "denormalize_sparse_sdf",
    "derive_occupancy",
    "mesh_to_sdf",
    "normalize_mesh",
    "occupancy_from_sdf",
    "read_field",
    "resample_trilinear",
    "restrict_to_sparse",
    "shell_threshold_for",
    "subdivide_occupied",
    "union_shapes",
    "unsigned_distance_field",
    "write_field",
]
