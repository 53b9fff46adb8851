"""Core geometric containers: dense scalar fields, sparse voxel grids, triangle meshes.

All fields live on the fixed cube [-1, 1]^3. A grid of resolution N has cell
spacing h = 2/N and cell centers at -1 + (i + 0.5) * h.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Maximum possible distance between two points of the domain cube.
MAX_SDF = 2.0 * math.sqrt(3.0)


def cell_centers_1d(resolution: int) -> np.ndarray:
    """Coordinates of cell centers along one axis."""
    h = 2.0 / resolution
    return -1.0 + (np.arange(resolution) + 0.5) * h


def cell_center_grid(resolution: int) -> np.ndarray:
    """(N, N, N, 3) array of cell-center positions, index order (ix, iy, iz)."""
    c = cell_centers_1d(resolution)
    gx, gy, gz = np.meshgrid(c, c, c, indexing="ij")
    return np.stack([gx, gy, gz], axis=-1)


@dataclass
class DenseField3D:
    """Regular N^3 grid of reals on [-1,1]^3.

    ``values`` has shape (N, N, N), C order, axes (x, y, z). ``kind`` is
    "sdf" or "occupancy" and selects which invariants apply.
    """

    resolution: int
    values: np.ndarray
    kind: str = "sdf"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float32)
        if self.resolution <= 0:
            raise ValueError(f"invalid-resolution: {self.resolution}")
        if self.values.shape != (self.resolution,) * 3:
            raise ValueError(
                f"shape-mismatch: values shape {self.values.shape} "
                f"!= resolution {self.resolution}^3"
            )

    @property
    def spacing(self) -> float:
        return 2.0 / self.resolution

    def validate(self) -> None:
        """Check the payload invariants; raise ValueError on violation."""
        if not np.all(np.isfinite(self.values)):
            raise ValueError("non-finite-values")
        if self.kind == "sdf":
            if np.any(np.abs(self.values) > MAX_SDF + 1e-6):
                raise ValueError("sdf-out-of-range")
        elif self.kind == "occupancy":
            if not np.all((self.values == 0.0) | (self.values == 1.0)):
                raise ValueError("occupancy-not-binary")
        else:
            raise ValueError(f"unknown-kind: {self.kind}")

    def copy(self) -> "DenseField3D":
        return DenseField3D(self.resolution, self.values.copy(), self.kind)


def _sort_coords(coords: np.ndarray, values: np.ndarray):
    order = np.lexsort((coords[:, 2], coords[:, 1], coords[:, 0]))
    return coords[order], values[order]


@dataclass
class SparseVoxelGrid:
    """Explicit list of occupied fine voxels with one value per voxel.

    ``coords`` is (K, 3) int, unique and lexicographically sorted, each
    component in [0, resolution). The coord set is a union of full 8-child
    blocks: subdividing the parent set reproduces it exactly.
    """

    resolution: int
    coords: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.coords = np.asarray(self.coords, dtype=np.int64).reshape(-1, 3)
        self.values = np.asarray(self.values, dtype=np.float32).reshape(-1)
        if len(self.coords) != len(self.values):
            raise ValueError("coord-value-length-mismatch")
        self.coords, self.values = _sort_coords(self.coords, self.values)

    @property
    def parent_resolution(self) -> int:
        return self.resolution // 2

    @property
    def spacing(self) -> float:
        return 2.0 / self.resolution

    def __len__(self) -> int:
        return len(self.coords)

    def parents(self) -> np.ndarray:
        """Unique, sorted parent coordinates (integer-halved)."""
        p = self.coords // 2
        return np.unique(p, axis=0)

    def validate(self) -> None:
        if len(self.coords) == 0:
            return
        if self.coords.min() < 0 or self.coords.max() >= self.resolution:
            raise ValueError("coord-out-of-range")
        if len(np.unique(self.coords, axis=0)) != len(self.coords):
            raise ValueError("duplicate-coords")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("non-finite-values")
        # Subdivision closure: every parent must contribute all 8 children.
        parents = self.parents()
        if len(self.coords) != 8 * len(parents):
            raise ValueError("subdivision-closure-violated")

    def with_values(self, values: np.ndarray) -> "SparseVoxelGrid":
        """Same coords, new values (no re-sorting needed: coords unchanged)."""
        out = SparseVoxelGrid(self.resolution, self.coords.copy(), values)
        return out


@dataclass
class TriangleMesh:
    """Indexed triangle mesh. ``vertices`` (V, 3) float, ``triangles`` (T, 3) int."""

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_triangles(self) -> int:
        return len(self.triangles)

    def validate(self) -> None:
        if len(self.triangles) and (
            self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices)
        ):
            raise ValueError("triangle-index-out-of-range")
        if not np.all(np.isfinite(self.vertices)):
            raise ValueError("non-finite-vertices")

    def edge_counts(self) -> dict:
        """Map from undirected edge (i, j), i<j, to incident-triangle count."""
        counts: dict = {}
        for tri in self.triangles:
            a, b, c = int(tri[0]), int(tri[1]), int(tri[2])
            for u, v in ((a, b), (b, c), (c, a)):
                key = (u, v) if u < v else (v, u)
                counts[key] = counts.get(key, 0) + 1
        return counts

    def is_watertight(self) -> bool:
        """True iff every edge is shared by exactly two triangles."""
        if len(self.triangles) == 0:
            return False
        tri = self.triangles
        edges = np.concatenate(
            [tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]], axis=0
        )
        edges = np.sort(edges, axis=1)
        _, counts = np.unique(edges, axis=0, return_counts=True)
        return bool(np.all(counts == 2))

    def bounding_box(self):
        """(min, max) corners of the tight axis-aligned bounding box."""
        if len(self.vertices) == 0:
            raise ValueError("empty-mesh")
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def triangle_areas(self) -> np.ndarray:
        v = self.vertices
        t = self.triangles
        cross = np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]])
        return 0.5 * np.linalg.norm(cross, axis=1)

    def copy(self) -> "TriangleMesh":
        return TriangleMesh(self.vertices.copy(), self.triangles.copy())
