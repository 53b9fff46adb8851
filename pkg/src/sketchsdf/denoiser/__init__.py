from .blocks import TimeEmbedding, init_parameters, time_embedding
from .checkpoint import load_checkpoint, save_checkpoint
from .conditioning import NULL, Conditioning, category_embedding
from .dense_unet import DenseUNet, DenseUNetConfig, dense_forward
from .sparse_unet import (
    SparseStructure,
    SparseUNet,
    SparseUNetConfig,
    concat_structures,
    sparse_forward,
    structure_for,
)

__all__ = [
    "NULL",
    "Conditioning",
    "DenseUNet",
    "DenseUNetConfig",
    "SparseStructure",
    "SparseUNet",
    "SparseUNetConfig",
    "TimeEmbedding",
    "category_embedding",
    "concat_structures",
    "dense_forward",
    "init_parameters",
    "load_checkpoint",
    "save_checkpoint",
    "sparse_forward",
    "structure_for",
    "time_embedding",
]
