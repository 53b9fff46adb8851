"""Generative-set metrics (COV / MMD / 1-NNA) and nearest-shape retrieval."""

from __future__ import annotations

from typing import List, Sequence, Tuple

import numpy as np

from ..fields.types import TriangleMesh
from .pointsets import chamfer, emd, sample_mesh_points

BASE_METRICS = {"CD": chamfer, "EMD": emd}


def _pairwise(sets_a, sets_b, metric) -> np.ndarray:
    d = np.zeros((len(sets_a), len(sets_b)))
    for i, a in enumerate(sets_a):
        for j, b in enumerate(sets_b):
            d[i, j] = metric(a, b)
    return d


def cov_mmd_1nna(
    gen_sets: Sequence[np.ndarray],
    ref_sets: Sequence[np.ndarray],
    base_metric: str = "CD",
) -> Tuple[float, float, float]:
    """(coverage %, minimum matching distance, 1-NN two-sample accuracy %).

    COV: fraction of reference sets that are the nearest reference of some
    generated set. MMD: mean over references of the distance to the nearest
    generated set. 1-NNA: leave-one-out 1-NN classification accuracy on the
    merged pool; ties break toward the lexicographically smaller index.
    """
    if len(gen_sets) == 0 or len(ref_sets) == 0:
        raise ValueError("empty-side")
    metric = BASE_METRICS[base_metric]
    d_gr = _pairwise(gen_sets, ref_sets, metric)

    covered = {int(j) for j in d_gr.argmin(axis=1)}
    cov = 100.0 * len(covered) / len(ref_sets)
    mmd = float(d_gr.min(axis=0).mean())

    # Merged pool: gen first (label 1), then ref (label 0).
    pool = list(gen_sets) + list(ref_sets)
    labels = np.array([1] * len(gen_sets) + [0] * len(ref_sets))
    n = len(pool)
    d = np.zeros((n, n))
    d_gg = _pairwise(gen_sets, gen_sets, metric)
    d_rr = _pairwise(ref_sets, ref_sets, metric)
    g = len(gen_sets)
    d[:g, :g] = d_gg
    d[:g, g:] = d_gr
    d[g:, :g] = d_gr.T
    d[g:, g:] = d_rr
    np.fill_diagonal(d, np.inf)
    # argmin breaks ties toward the smaller index by construction.
    nearest = d.argmin(axis=1)
    correct = (labels[nearest] == labels).sum()
    nna = 100.0 * correct / n
    return cov, mmd, nna


def nearest_retrieval(
    query_mesh: TriangleMesh,
    train_meshes: Sequence[TriangleMesh],
    k: int,
    num_points: int = 2048,
    seed: int = 0,
) -> List[Tuple[int, float]]:
    """Top-k training meshes by Chamfer distance on sampled surface points."""
    if k > len(train_meshes):
        raise ValueError(f"k={k} exceeds train size {len(train_meshes)}")
    q = sample_mesh_points(query_mesh, num_points, seed)
    dists = []
    for idx, mesh in enumerate(train_meshes):
        p = sample_mesh_points(mesh, num_points, seed)
        dists.append((idx, chamfer(q, p)))
    dists.sort(key=lambda t: (t[1], t[0]))
    return dists[:k]


def retrieval_histogram(
    gen_meshes: Sequence[TriangleMesh],
    train_meshes: Sequence[TriangleMesh],
    bins: int = 10,
    num_points: int = 2048,
    seed: int = 0,
):
    """Histogram of each generated shape's Chamfer distance to its nearest
    training shape (square-root binning)."""
    nearest = [
        nearest_retrieval(m, train_meshes, k=1, num_points=num_points, seed=seed)[0][1]
        for m in gen_meshes
    ]
    values = np.sqrt(np.asarray(nearest))
    counts, edges = np.histogram(values, bins=bins)
    return counts.tolist(), (edges**2).tolist(), nearest
