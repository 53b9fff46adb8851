"""Point-set and voxel metrics: Chamfer, EMD (exact + auction), Voxel-IOU,
and area-weighted mesh sampling."""

from __future__ import annotations

from typing import Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial import cKDTree

from ..fields.types import DenseField3D, TriangleMesh

EMD_EXACT_LIMIT = 256


def chamfer(p: np.ndarray, q: np.ndarray) -> float:
    """Symmetric Chamfer: sum of both directional means of squared NN distances."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if len(p) == 0 or len(q) == 0:
        raise ValueError("empty-point-set")
    d_pq, _ = cKDTree(q).query(p, k=1)
    d_qp, _ = cKDTree(p).query(q, k=1)
    return float((d_pq**2).mean() + (d_qp**2).mean())


def emd(p: np.ndarray, q: np.ndarray) -> float:
    """Minimum-cost perfect-matching mean distance.

    Exact Hungarian for n <= 256; scaled auction approximation above
    (see emd_with_method for the tag).
    """
    return emd_with_method(p, q)[0]


def emd_with_method(p: np.ndarray, q: np.ndarray) -> Tuple[float, str]:
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if len(p) != len(q):
        raise ValueError(f"size-mismatch: {len(p)} != {len(q)}")
    if len(p) == 0:
        raise ValueError("empty-point-set")
    cost = np.linalg.norm(p[:, None, :] - q[None, :, :], axis=-1)
    if len(p) <= EMD_EXACT_LIMIT:
        rows, cols = linear_sum_assignment(cost)
        return float(cost[rows, cols].mean()), "hungarian-exact"
    cols = _auction_assignment(cost)
    return float(cost[np.arange(len(p)), cols].mean()), "auction-approximate"


def _auction_assignment(cost: np.ndarray) -> np.ndarray:
    """Parallel forward auction with epsilon scaling (minimization)."""
    n = cost.shape[0]
    benefit = cost.max() - cost  # maximize benefit == minimize cost
    scale = max(benefit.max(), 1e-12)
    eps = scale / 4.0
    eps_min = 1e-4 * scale / n
    prices = np.zeros(n)
    owner = np.full(n, -1, dtype=np.int64)  # object -> person
    assigned = np.full(n, -1, dtype=np.int64)  # person -> object

    while True:
        owner[:] = -1
        assigned[:] = -1
        guard = 0
        while (assigned < 0).any():
            guard += 1
            if guard > 200 * n:
                # Shouldn't happen; finish greedily to stay total.
                free_p = np.where(assigned < 0)[0]
                free_o = np.where(owner < 0)[0]
                for pi, oi in zip(free_p, free_o):
                    assigned[pi] = oi
                    owner[oi] = pi
                break
            free = np.where(assigned < 0)[0]
            values = benefit[free] - prices[None, :]
            best = np.argmax(values, axis=1)
            best_val = values[np.arange(len(free)), best]
            values[np.arange(len(free)), best] = -np.inf
            second_val = values.max(axis=1)
            bids = best_val - second_val + eps
            # Highest bid per object wins this round.
            win_bid: dict = {}
            for k, obj in enumerate(best):
                b = bids[k]
                cur = win_bid.get(obj)
                if cur is None or b > cur[0]:
                    win_bid[obj] = (b, free[k])
            for obj, (b, person) in win_bid.items():
                prev = owner[obj]
                if prev >= 0:
                    assigned[prev] = -1
                owner[obj] = person
                assigned[person] = obj
                prices[obj] += b
        if eps <= eps_min:
            return assigned
        eps = max(eps / 8.0, eps_min)


def voxel_iou(a: DenseField3D, b: DenseField3D) -> float:
    """Intersection-over-union of two occupancy fields."""
    if a.resolution != b.resolution:
        raise ValueError(f"resolution-mismatch: {a.resolution} != {b.resolution}")
    av = a.values > 0.5
    bv = b.values > 0.5
    union = np.logical_or(av, bv).sum()
    if union == 0:
        raise ValueError("empty-union")
    return float(np.logical_and(av, bv).sum() / union)


def sample_mesh_points(mesh: TriangleMesh, n: int = 2048, seed: int = 0) -> np.ndarray:
    """Area-weighted uniform surface samples (fixed seed for reproducibility)."""
    if mesh.num_triangles == 0:
        raise ValueError("empty-mesh")
    rng = np.random.default_rng(seed)
    areas = mesh.triangle_areas()
    total = areas.sum()
    if total <= 0:
        raise ValueError("degenerate-mesh")
    tri_idx = rng.choice(len(areas), size=n, p=areas / total)
    u = rng.uniform(size=n)
    v = rng.uniform(size=n)
    flip = u + v > 1
    u[flip] = 1 - u[flip]
    v[flip] = 1 - v[flip]
    t = mesh.triangles[tri_idx]
    a = mesh.vertices[t[:, 0]]
    b = mesh.vertices[t[:, 1]]
    c = mesh.vertices[t[:, 2]]
    return a + u[:, None] * (b - a) + v[:, None] * (c - a)
