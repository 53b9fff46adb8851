"""Sign completion of sparse SDF shells into dense fields for extraction."""

from __future__ import annotations

import warnings

import numpy as np
from scipy import ndimage

from ..fields.ops import clamp_band
from ..fields.types import DenseField3D, SparseVoxelGrid


class LeakyShellWarning(UserWarning):
    """The sparse shell does not enclose any interior volume."""


def complete_field(sparse: SparseVoxelGrid) -> DenseField3D:
    """Fill unoccupied cells with +-3h by flood-filling exterior from the boundary.

    Sparse coords keep their (de-normalized) values. Cells 6-connected to the
    domain boundary through unoccupied space become +3h; enclosed pockets
    become -3h. A shell that leaks (no interior survives) triggers
    LeakyShellWarning since the extracted mesh will be empty.
    """
    n = sparse.resolution
    band = clamp_band(n)
    values = np.full((n, n, n), band, dtype=np.float32)
    occupied = np.zeros((n, n, n), dtype=bool)
    if len(sparse) > 0:
        c = sparse.coords
        values[c[:, 0], c[:, 1], c[:, 2]] = sparse.values
        occupied[c[:, 0], c[:, 1], c[:, 2]] = True

    free = ~occupied
    structure = ndimage.generate_binary_structure(3, 1)  # 6-connectivity
    labels, num = ndimage.label(free, structure=structure)
    if num > 0:
        boundary_labels = set()
        for face in (
            labels[0, :, :], labels[-1, :, :],
            labels[:, 0, :], labels[:, -1, :],
            labels[:, :, 0], labels[:, :, -1],
        ):
            boundary_labels.update(np.unique(face).tolist())
        boundary_labels.discard(0)
        exterior = np.isin(labels, sorted(boundary_labels)) & free
        interior = free & ~exterior
        values[interior] = -band
        if len(sparse) > 0 and not interior.any():
            warnings.warn(
                "leaky-shell: no enclosed interior; extraction will be empty",
                LeakyShellWarning,
                stacklevel=2,
            )
    return DenseField3D(n, values, kind="sdf")
