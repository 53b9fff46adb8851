"""LASF flat binary container for dense and sparse fields.

Layout (all little-endian):
  magic "LASF" | version u32 | kind u8 (0=dense SDF, 1=dense occupancy,
  2=sparse) | resolution u32 | payload.
Dense payload: resolution^3 float32 in C order.
Sparse payload: count u64, then count u16 coordinate triples, then count float32.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Union

import numpy as np

from .types import DenseField3D, SparseVoxelGrid

MAGIC = b"LASF"
VERSION = 1

KIND_DENSE_SDF = 0
KIND_DENSE_OCC = 1
KIND_SPARSE = 2

_HEADER = struct.Struct("<4sIBI")

Field = Union[DenseField3D, SparseVoxelGrid]


def write_field(field: Field, path) -> None:
    path = Path(path)
    if isinstance(field, DenseField3D):
        kind = KIND_DENSE_OCC if field.kind == "occupancy" else KIND_DENSE_SDF
        payload = field.values.astype("<f4").tobytes(order="C")
    elif isinstance(field, SparseVoxelGrid):
        kind = KIND_SPARSE
        if field.resolution > np.iinfo(np.uint16).max:
            raise ValueError("resolution-too-large-for-u16-coords")
        parts = [
            struct.pack("<Q", len(field)),
            field.coords.astype("<u2").tobytes(order="C"),
            field.values.astype("<f4").tobytes(order="C"),
        ]
        payload = b"".join(parts)
    else:
        raise TypeError(f"unsupported field type: {type(field)!r}")
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, VERSION, kind, field.resolution))
        f.write(payload)


def read_field(path) -> Field:
    with open(path, "rb") as f:
        header = f.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise ValueError(f"truncated-header: {path}")
        magic, version, kind, resolution = _HEADER.unpack(header)
        if magic != MAGIC:
            raise ValueError(f"bad-magic: {magic!r}")
        if version != VERSION:
            raise ValueError(f"unsupported-version: {version}")
        data = f.read()
    if kind in (KIND_DENSE_SDF, KIND_DENSE_OCC):
        expected = resolution**3 * 4
        if len(data) != expected:
            raise ValueError(f"payload-size-mismatch: {len(data)} != {expected}")
        values = np.frombuffer(data, dtype="<f4").reshape((resolution,) * 3)
        return DenseField3D(
            resolution,
            values.copy(),
            kind="occupancy" if kind == KIND_DENSE_OCC else "sdf",
        )
    if kind == KIND_SPARSE:
        (count,) = struct.unpack_from("<Q", data, 0)
        off = 8
        coords = np.frombuffer(data, dtype="<u2", count=count * 3, offset=off)
        off += count * 3 * 2
        values = np.frombuffer(data, dtype="<f4", count=count, offset=off)
        return SparseVoxelGrid(
            resolution, coords.reshape(-1, 3).astype(np.int64), values.copy()
        )
    raise ValueError(f"unknown-kind: {kind}")
