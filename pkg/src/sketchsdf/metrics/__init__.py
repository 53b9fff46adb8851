from .fid import (
    FIDAccumulator,
    StubFeatureExtractor,
    fibonacci_views,
    frechet_distance,
    shading_fid,
)
from .genmetrics import cov_mmd_1nna, nearest_retrieval, retrieval_histogram
from .pointsets import (
    EMD_EXACT_LIMIT,
    chamfer,
    emd,
    emd_with_method,
    sample_mesh_points,
    voxel_iou,
)
from .report import CONVENTIONS, EvaluationReport, MetricEntry
from .sketch_metrics import EmbeddingModel, StubEmbeddingModel, clip_score, sketch_cd

__all__ = [
    "CONVENTIONS",
    "EMD_EXACT_LIMIT",
    "EmbeddingModel",
    "EvaluationReport",
    "FIDAccumulator",
    "MetricEntry",
    "StubEmbeddingModel",
    "StubFeatureExtractor",
    "chamfer",
    "clip_score",
    "cov_mmd_1nna",
    "emd",
    "emd_with_method",
    "fibonacci_views",
    "frechet_distance",
    "nearest_retrieval",
    "retrieval_histogram",
    "sample_mesh_points",
    "shading_fid",
    "sketch_cd",
    "voxel_iou",
]
