from .config import OptimizerConfig, RunConfig, SamplerConfig, apply_env_overrides
from .datasets import (
    OccupancyDataset,
    OccupancySample,
    SdfDataset,
    SdfSample,
    build_occupancy_dataset,
    build_sdf_dataset,
    occupancy_of,
)
from .evaluate import (
    evaluate_category_sets,
    evaluate_run,
    evaluate_sketch_pairs,
    validate_report,
    write_reports,
)
from .generate import (
    EmptyGenerationError,
    GenerationResult,
    generate,
    sample_occupancy,
    shell_components,
    sketch_conditioning,
)
from .toydata import ToyShape, bar_template_field, make_bar_shapes, make_toy_shapes
from .train import StageTrainer, train_occupancy, train_sdf

__all__ = [
    "EmptyGenerationError",
    "GenerationResult",
    "OccupancyDataset",
    "OccupancySample",
    "OptimizerConfig",
    "RunConfig",
    "SamplerConfig",
    "SdfDataset",
    "SdfSample",
    "StageTrainer",
    "ToyShape",
    "apply_env_overrides",
    "bar_template_field",
    "build_occupancy_dataset",
    "build_sdf_dataset",
    "evaluate_category_sets",
    "evaluate_run",
    "evaluate_sketch_pairs",
    "generate",
    "sample_occupancy",
    "make_bar_shapes",
    "make_toy_shapes",
    "occupancy_of",
    "shell_components",
    "sketch_conditioning",
    "train_occupancy",
    "train_sdf",
    "validate_report",
    "write_reports",
]
