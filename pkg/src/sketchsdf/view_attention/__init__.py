from .attention import (
    LocalCrossAttention,
    patch_position_encoding,
    sinusoidal_encoding,
    voxel_position_encoding,
)
from .cameras import (
    VIEW_AZIMUTHS,
    VIEW_NAMES,
    CameraView,
    perturbed,
    predefined_views,
    project_points,
    project_voxel_centers,
    view_by_name,
)
from .encoder import PatchEncoder, StubPatchEncoder, encode_sketch, encoder_from_spec
from .masks import (
    PatchGrid,
    build_attention_mask,
    default_distance_threshold,
    half_region,
    patch_centers,
    stitch_patch_features,
)

__all__ = [
    "VIEW_AZIMUTHS",
    "VIEW_NAMES",
    "CameraView",
    "LocalCrossAttention",
    "PatchEncoder",
    "PatchGrid",
    "StubPatchEncoder",
    "build_attention_mask",
    "default_distance_threshold",
    "encode_sketch",
    "encoder_from_spec",
    "half_region",
    "patch_centers",
    "patch_position_encoding",
    "perturbed",
    "predefined_views",
    "project_points",
    "project_voxel_centers",
    "sinusoidal_encoding",
    "stitch_patch_features",
    "view_by_name",
    "voxel_position_encoding",
]
