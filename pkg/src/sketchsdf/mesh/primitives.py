"""Procedural meshes and analytic SDF evaluators used as fixtures and toy data."""

from __future__ import annotations

import numpy as np

from ..fields.types import DenseField3D, TriangleMesh, cell_center_grid


def icosphere(radius: float = 0.5, subdivisions: int = 3, center=(0.0, 0.0, 0.0)) -> TriangleMesh:
    """Icosahedron subdivided ``subdivisions`` times, projected to the sphere."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
            (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
            (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
        ],
        dtype=np.float64,
    )
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = verts.tolist()
    for _ in range(subdivisions):
        midpoint: dict = {}
        new_faces = []

        def mid(i, j):
            key = (i, j) if i < j else (j, i)
            if key not in midpoint:
                m = np.array(verts[i]) + np.array(verts[j])
                m /= np.linalg.norm(m)
                midpoint[key] = len(verts)
                verts.append(m.tolist())
            return midpoint[key]

        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    v = np.array(verts) * radius + np.asarray(center, dtype=np.float64)
    return TriangleMesh(v, np.array(faces, dtype=np.int64))


def box_mesh(extents=(1.6, 1.6, 1.6), center=(0.0, 0.0, 0.0)) -> TriangleMesh:
    """Axis-aligned box with 12 triangles and outward winding."""
    e = np.asarray(extents, dtype=np.float64) / 2.0
    c = np.asarray(center, dtype=np.float64)
    corners = np.array(
        [
            (-1, -1, -1), (1, -1, -1), (1, 1, -1), (-1, 1, -1),
            (-1, -1, 1), (1, -1, 1), (1, 1, 1), (-1, 1, 1),
        ],
        dtype=np.float64,
    )
    v = corners * e + c
    quads = [
        (0, 3, 2, 1),  # z-
        (4, 5, 6, 7),  # z+
        (0, 1, 5, 4),  # y-
        (2, 3, 7, 6),  # y+
        (0, 4, 7, 3),  # x-
        (1, 2, 6, 5),  # x+
    ]
    tris = []
    for a, b, cc, d in quads:
        tris += [(a, b, cc), (a, cc, d)]
    return TriangleMesh(v, np.array(tris, dtype=np.int64))


def sphere_sdf_values(resolution: int, radius: float = 0.5, center=(0, 0, 0)) -> DenseField3D:
    pts = cell_center_grid(resolution)
    d = np.linalg.norm(pts - np.asarray(center, dtype=np.float64), axis=-1) - radius
    return DenseField3D(resolution, d.astype(np.float32), kind="sdf")


def box_sdf_values(resolution: int, half_extents=(0.4, 0.4, 0.4), center=(0, 0, 0)) -> DenseField3D:
    pts = cell_center_grid(resolution) - np.asarray(center, dtype=np.float64)
    q = np.abs(pts) - np.asarray(half_extents, dtype=np.float64)
    outside = np.linalg.norm(np.maximum(q, 0.0), axis=-1)
    inside = np.minimum(q.max(axis=-1), 0.0)
    return DenseField3D(resolution, (outside + inside).astype(np.float32), kind="sdf")


def torus_sdf_values(
    resolution: int, major: float = 0.5, minor: float = 0.2, center=(0, 0, 0)
) -> DenseField3D:
    pts = cell_center_grid(resolution) - np.asarray(center, dtype=np.float64)
    ring = np.sqrt(pts[..., 0] ** 2 + pts[..., 2] ** 2) - major
    d = np.sqrt(ring**2 + pts[..., 1] ** 2) - minor
    return DenseField3D(resolution, d.astype(np.float32), kind="sdf")


def ellipsoid_sdf_values(resolution: int, radii=(0.5, 0.3, 0.4), center=(0, 0, 0)) -> DenseField3D:
    """Approximate ellipsoid SDF (exact on axes, good near the surface)."""
    pts = cell_center_grid(resolution) - np.asarray(center, dtype=np.float64)
    r = np.asarray(radii, dtype=np.float64)
    k0 = np.linalg.norm(pts / r, axis=-1)
    k1 = np.linalg.norm(pts / (r * r), axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.where(k1 > 0, k0 * (k0 - 1.0) / k1, -r.min())
    return DenseField3D(resolution, d.astype(np.float32), kind="sdf")
