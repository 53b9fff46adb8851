"""Mesh normalization and mesh -> discrete SDF conversion.

Unsigned distance: exact point-to-triangle minimum, pruned by a KD-tree over
triangle centroids with a radius bound that preserves exactness. Sign:
parity of ray-triangle crossings along 13 fixed directions with majority
vote (robust to grazing hits without any watertight-walk bookkeeping).
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from .types import DenseField3D, TriangleMesh, cell_center_grid

# Half of the 26-neighborhood directions, tilted by a tiny fixed amount so
# none stays exactly aligned with grid planes or face diagonals.
_TILT = np.array([1.234e-5, 2.345e-5, 3.456e-5])
RAY_DIRECTIONS = np.array(
    [
        (1, 0, 0), (0, 1, 0), (0, 0, 1),
        (1, 1, 0), (1, -1, 0), (1, 0, 1),
        (1, 0, -1), (0, 1, 1), (0, 1, -1),
        (1, 1, 1), (1, 1, -1), (1, -1, 1), (1, -1, -1),
    ],
    dtype=np.float64,
)
RAY_DIRECTIONS = RAY_DIRECTIONS + _TILT
RAY_DIRECTIONS /= np.linalg.norm(RAY_DIRECTIONS, axis=1, keepdims=True)


def normalize_mesh(mesh: TriangleMesh) -> TriangleMesh:
    """Uniformly scale + translate so the tight bbox is centered at the origin
    with its longest axis spanning exactly [-0.8, 0.8]."""
    if mesh.num_triangles < 1:
        raise ValueError("empty-mesh")
    mesh.validate()
    lo, hi = mesh.bounding_box()
    extent = hi - lo
    longest = float(extent.max())
    if longest <= 0.0:
        raise ValueError("degenerate-extent")
    center = (lo + hi) / 2.0
    scale = 1.6 / longest
    return TriangleMesh((mesh.vertices - center) * scale, mesh.triangles.copy())


def point_triangle_distances(
    p: np.ndarray, a: np.ndarray, b: np.ndarray, c: np.ndarray
) -> np.ndarray:
    """Exact distances for row-paired points and triangles (Ericson's regions)."""
    ab = b - a
    ac = c - a
    ap = p - a
    d1 = np.einsum("ij,ij->i", ab, ap)
    d2 = np.einsum("ij,ij->i", ac, ap)
    bp = p - b
    d3 = np.einsum("ij,ij->i", ab, bp)
    d4 = np.einsum("ij,ij->i", ac, bp)
    cp = p - c
    d5 = np.einsum("ij,ij->i", ab, cp)
    d6 = np.einsum("ij,ij->i", ac, cp)

    vc = d1 * d4 - d3 * d2
    vb = d5 * d2 - d1 * d6
    va = d3 * d6 - d5 * d4

    closest = np.empty_like(p)
    done = np.zeros(len(p), dtype=bool)

    def assign(mask, value):
        nonlocal done
        m = mask & ~done
        if m.any():
            closest[m] = value[m] if value.ndim == 2 else value
            done |= m

    assign((d1 <= 0) & (d2 <= 0), a)  # vertex A
    assign((d3 >= 0) & (d4 <= d3), b)  # vertex B
    with np.errstate(divide="ignore", invalid="ignore"):
        t_ab = np.where(d1 - d3 != 0, d1 / (d1 - d3), 0.0)
    assign((vc <= 0) & (d1 >= 0) & (d3 <= 0), a + t_ab[:, None] * ab)  # edge AB
    assign((d6 >= 0) & (d5 <= d6), c)  # vertex C
    with np.errstate(divide="ignore", invalid="ignore"):
        t_ac = np.where(d2 - d6 != 0, d2 / (d2 - d6), 0.0)
    assign((vb <= 0) & (d2 >= 0) & (d6 <= 0), a + t_ac[:, None] * ac)  # edge AC
    denom_bc = (d4 - d3) + (d5 - d6)
    with np.errstate(divide="ignore", invalid="ignore"):
        t_bc = np.where(denom_bc != 0, (d4 - d3) / denom_bc, 0.0)
    assign(
        (va <= 0) & (d4 - d3 >= 0) & (d5 - d6 >= 0),
        b + t_bc[:, None] * (c - b),
    )  # edge BC
    # Interior projection.
    rem = ~done
    if rem.any():
        s = va + vb + vc
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = np.where(s != 0, 1.0 / s, 0.0)
        v = vb * inv
        w = vc * inv
        closest[rem] = (a + v[:, None] * ab + w[:, None] * ac)[rem]
    return np.linalg.norm(p - closest, axis=1)


def unsigned_distance_field(points: np.ndarray, mesh: TriangleMesh) -> np.ndarray:
    """Exact min distance from each point to the mesh surface."""
    v = mesh.vertices
    t = mesh.triangles
    tri_a, tri_b, tri_c = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
    centroids = (tri_a + tri_b + tri_c) / 3.0
    r_max = float(
        np.sqrt(
            np.max(
                np.maximum(
                    np.maximum(
                        ((tri_a - centroids) ** 2).sum(1),
                        ((tri_b - centroids) ** 2).sum(1),
                    ),
                    ((tri_c - centroids) ** 2).sum(1),
                )
            )
        )
    )
    tree = cKDTree(centroids)
    nearest_centroid, _ = tree.query(points, k=1)
    # Any globally-closest triangle has centroid within nearest + 2 r_max.
    radii = nearest_centroid + 2.0 * r_max + 1e-12
    candidate_lists = tree.query_ball_point(points, radii)
    counts = np.fromiter((len(c) for c in candidate_lists), dtype=np.int64)
    point_idx = np.repeat(np.arange(len(points)), counts)
    tri_idx = np.concatenate([np.asarray(c, dtype=np.int64) for c in candidate_lists])
    d = point_triangle_distances(
        points[point_idx], tri_a[tri_idx], tri_b[tri_idx], tri_c[tri_idx]
    )
    out = np.full(len(points), np.inf)
    np.minimum.at(out, point_idx, d)
    return out


def _ray_parity(points: np.ndarray, mesh: TriangleMesh, direction: np.ndarray) -> np.ndarray:
    """Crossing-count parity (1 = odd) of rays from each point along direction."""
    v = mesh.vertices
    t = mesh.triangles
    a, b, c = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
    d = direction

    # 2D binning in the plane perpendicular to the ray.
    ref = np.array([1.0, 0.0, 0.0]) if abs(d[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = np.cross(d, ref)
    u /= np.linalg.norm(u)
    w = np.cross(d, u)

    tri_u = np.stack([a @ u, b @ u, c @ u], axis=1)
    tri_w = np.stack([a @ w, b @ w, c @ w], axis=1)
    pu = points @ u
    pw = points @ w
    lo_u = min(tri_u.min(), pu.min()) - 1e-9
    hi_u = max(tri_u.max(), pu.max()) + 1e-9
    lo_w = min(tri_w.min(), pw.min()) - 1e-9
    hi_w = max(tri_w.max(), pw.max()) + 1e-9
    g = int(np.clip(np.sqrt(len(t)), 8, 128))
    su = (hi_u - lo_u) / g
    sw = (hi_w - lo_w) / g

    bins: dict = {}
    bu0 = np.clip(((tri_u.min(1) - lo_u) / su).astype(int), 0, g - 1)
    bu1 = np.clip(((tri_u.max(1) - lo_u) / su).astype(int), 0, g - 1)
    bw0 = np.clip(((tri_w.min(1) - lo_w) / sw).astype(int), 0, g - 1)
    bw1 = np.clip(((tri_w.max(1) - lo_w) / sw).astype(int), 0, g - 1)
    for ti in range(len(t)):
        for bi in range(bu0[ti], bu1[ti] + 1):
            for bj in range(bw0[ti], bw1[ti] + 1):
                bins.setdefault((bi, bj), []).append(ti)

    pbu = np.clip(((pu - lo_u) / su).astype(int), 0, g - 1)
    pbw = np.clip(((pw - lo_w) / sw).astype(int), 0, g - 1)
    pair_pts = []
    pair_tris = []
    for pi in range(len(points)):
        cand = bins.get((pbu[pi], pbw[pi]))
        if cand:
            pair_pts.append(np.full(len(cand), pi, dtype=np.int64))
            pair_tris.append(np.asarray(cand, dtype=np.int64))
    counts = np.zeros(len(points), dtype=np.int64)
    if not pair_pts:
        return counts
    pi = np.concatenate(pair_pts)
    ti = np.concatenate(pair_tris)

    # Moller-Trumbore with per-triangle precomputation.
    e1 = b - a
    e2 = c - a
    pvec = np.cross(np.broadcast_to(d, e2.shape), e2)
    det = np.einsum("ij,ij->i", e1, pvec)
    ok_det = np.abs(det) > 1e-14
    inv_det = np.where(ok_det, 1.0 / np.where(ok_det, det, 1.0), 0.0)

    tvec = points[pi] - a[ti]
    uu = np.einsum("ij,ij->i", tvec, pvec[ti]) * inv_det[ti]
    qvec = np.cross(tvec, e1[ti])
    vv = (qvec @ d) * inv_det[ti]
    tt = np.einsum("ij,ij->i", e2[ti], qvec) * inv_det[ti]
    hit = ok_det[ti] & (uu >= 0) & (vv >= 0) & (uu + vv <= 1) & (tt > 1e-9)
    np.add.at(counts, pi[hit], 1)
    return counts & 1


def mesh_to_sdf(mesh: TriangleMesh, resolution: int) -> DenseField3D:
    """Discrete SDF of a normalized watertight mesh on the [-1,1]^3 grid."""
    if mesh.num_triangles < 1:
        raise ValueError("empty-mesh")
    if not mesh.is_watertight():
        raise ValueError("open-surface: sign is undefined for non-watertight meshes")
    points = cell_center_grid(resolution).reshape(-1, 3)
    dist = unsigned_distance_field(points, mesh)
    votes = np.zeros(len(points), dtype=np.int64)
    for d in RAY_DIRECTIONS:
        votes += _ray_parity(points, mesh, d)
    inside = votes * 2 > len(RAY_DIRECTIONS)
    signed = np.where(inside, -dist, dist).astype(np.float32)
    n = resolution
    return DenseField3D(n, signed.reshape(n, n, n), kind="sdf")
