"""Deterministic software rasterizer producing shading images.

Gouraud-shaded Lambertian with a single directional light along the camera
axis, white background, z-buffered, no anti-aliasing (AA would perturb edge
extraction across platforms). Lambert intensity is tone-mapped into
[0.12, 0.80] of the gray range so fully-lit surfaces still contrast with
the white background.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from ..fields.types import TriangleMesh
from ..view_attention.cameras import CameraView, project_points

_TONE_BASE = 0.12
_TONE_SPAN = 0.68


def vertex_normals(mesh: TriangleMesh) -> np.ndarray:
    """Area-weighted vertex normals."""
    v, t = mesh.vertices, mesh.triangles
    fn = np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]])
    out = np.zeros_like(v)
    for k in range(3):
        np.add.at(out, t[:, k], fn)
    norms = np.linalg.norm(out, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return out / norms


def render_shading(
    mesh: TriangleMesh | Sequence[TriangleMesh], view: CameraView
) -> np.ndarray:
    """Render one mesh (or several, sharing one z-buffer) to uint8 grayscale."""
    meshes = [mesh] if isinstance(mesh, TriangleMesh) else list(mesh)
    size = view.image_size
    image = np.full((size, size), 255, dtype=np.uint8)
    zbuf = np.full((size, size), np.inf)
    light = view.position / np.linalg.norm(view.position)
    _, _, forward = view.axes()

    for m in meshes:
        if m.num_triangles == 0:
            continue
        coords, valid = project_points(m.vertices, view)
        depth = (m.vertices - view.position) @ forward
        normals = vertex_normals(m)
        # Intensity per vertex; |n.l| so winding mistakes stay visible.
        inten = np.abs(normals @ light)
        gray = np.clip(
            np.round(255.0 * (_TONE_BASE + _TONE_SPAN * inten)), 0, 255
        )
        if not valid.all():
            bad = ~valid
        else:
            bad = None
        for tri in m.triangles:
            if bad is not None and bad[tri].any():
                continue
            _raster_triangle(
                image, zbuf, coords[tri], depth[tri], gray[tri], size
            )
    return image


def _raster_triangle(image, zbuf, pts, depth, gray, size):
    (x0, y0), (x1, y1), (x2, y2) = pts
    lo_x = max(int(np.floor(min(x0, x1, x2) - 0.5)), 0)
    hi_x = min(int(np.ceil(max(x0, x1, x2) + 0.5)), size - 1)
    lo_y = max(int(np.floor(min(y0, y1, y2) - 0.5)), 0)
    hi_y = min(int(np.ceil(max(y0, y1, y2) + 0.5)), size - 1)
    if lo_x > hi_x or lo_y > hi_y:
        return
    area = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
    if area == 0.0:
        return
    xs = np.arange(lo_x, hi_x + 1) + 0.5
    ys = np.arange(lo_y, hi_y + 1) + 0.5
    px, py = np.meshgrid(xs, ys)
    w0 = ((x1 - px) * (y2 - py) - (x2 - px) * (y1 - py)) / area
    w1 = ((x2 - px) * (y0 - py) - (x0 - px) * (y2 - py)) / area
    w2 = 1.0 - w0 - w1
    covered = (w0 >= 0) & (w1 >= 0) & (w2 >= 0)
    if not covered.any():
        return
    z = w0 * depth[0] + w1 * depth[1] + w2 * depth[2]
    g = w0 * gray[0] + w1 * gray[1] + w2 * gray[2]
    sub_z = zbuf[lo_y : hi_y + 1, lo_x : hi_x + 1]
    win = covered & (z < sub_z)
    sub_z[win] = z[win]
    image[lo_y : hi_y + 1, lo_x : hi_x + 1][win] = np.clip(
        np.round(g[win]), 0, 255
    ).astype(np.uint8)
