"""ASCII OBJ import/export (triangles; quads imported as triangle fans)."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..fields.types import TriangleMesh


def export_obj(mesh: TriangleMesh, path) -> None:
    path = Path(path)
    lines = []
    for v in mesh.vertices:
        lines.append(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}")
    for t in mesh.triangles:
        lines.append(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}")
    path.write_text("\n".join(lines) + "\n")


def obj_bytes(mesh: TriangleMesh) -> bytes:
    """OBJ file content without touching disk (used by the HTTP service)."""
    parts = [f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}" for v in mesh.vertices]
    parts += [f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}" for t in mesh.triangles]
    return ("\n".join(parts) + "\n").encode()


def import_obj(path) -> TriangleMesh:
    vertices = []
    triangles = []
    with open(path) as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            tag = parts[0]
            if tag == "v":
                if len(parts) < 4:
                    raise ValueError(f"parse-error at line {lineno}: short vertex")
                try:
                    vertices.append([float(x) for x in parts[1:4]])
                except ValueError as e:
                    raise ValueError(f"parse-error at line {lineno}: {e}") from None
            elif tag == "f":
                if len(parts) < 4:
                    raise ValueError(f"parse-error at line {lineno}: short face")
                try:
                    # Indices may carry /vt/vn suffixes; 1-based, negatives
                    # count from the end.
                    idx = []
                    for tok in parts[1:]:
                        i = int(tok.split("/")[0])
                        idx.append(i - 1 if i > 0 else len(vertices) + i)
                except ValueError as e:
                    raise ValueError(f"parse-error at line {lineno}: {e}") from None
                for k in range(1, len(idx) - 1):  # fan triangulation
                    triangles.append([idx[0], idx[k], idx[k + 1]])
            # Other tags (vn, vt, o, g, s, usemtl, mtllib) are ignored.
    mesh = TriangleMesh(
        np.array(vertices, dtype=np.float64).reshape(-1, 3),
        np.array(triangles, dtype=np.int64).reshape(-1, 3),
    )
    mesh.validate()
    return mesh
