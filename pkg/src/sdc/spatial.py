"""Exact nearest-neighbor primitives shared by the density and gravity stages.

Queries go through a kd-tree, so batches run in expected O(N log N), but the
results are contractually exact: distance ties are broken by the lower object
id, which the raw tree does not guarantee, so tied rows are re-resolved with
an explicit (distance, id) sort.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree


@dataclass(frozen=True)
class NeighborList:
    """Ordered neighbors of one query point: ascending distance, self excluded."""

    ids: np.ndarray
    distances: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "ids", np.asarray(self.ids, dtype=np.int64))
        object.__setattr__(self, "distances", np.asarray(self.distances, dtype=np.float64))

    def __len__(self) -> int:
        return len(self.ids)


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    return pts


def nn_distances(points) -> np.ndarray:
    """Distance from each point to its closest other point (exact)."""
    pts = _as_points(points)
    if len(pts) < 2:
        raise ValueError("need at least 2 points")
    tree = cKDTree(pts)
    dist, _ = tree.query(pts, k=2)
    return dist[:, 1]


def _resolve_row(pts, tree, qi, k):
    """Exact (distance, id) ordering around query qi, self excluded."""
    xi = pts[qi]
    dist, _ = tree.query(xi, k=min(k + 1, len(pts)))
    r = float(np.max(dist))
    cand = tree.query_ball_point(xi, r * (1 + 1e-12) if r > 0 else 0.0)
    if len(cand) < min(k + 1, len(pts)):
        cand = list(range(len(pts)))
    cand = [c for c in cand if c != qi]
    d = np.sqrt(((pts[cand] - xi) ** 2).sum(axis=1))
    order = np.lexsort((cand, d))
    take = order[:k]
    return np.asarray(cand, dtype=np.int64)[take], d[take]


def k_nearest(points, query_index: int, k: int) -> NeighborList:
    """The k closest other points; fewer if the set is small. Ties by lower id."""
    pts = _as_points(points)
    if not 0 <= query_index < len(pts):
        raise IndexError(f"query index {query_index} out of range")
    if k < 1:
        raise ValueError("k must be >= 1")
    tree = cKDTree(pts)
    k = min(k, len(pts) - 1)
    if k == 0:
        return NeighborList(np.empty(0, dtype=np.int64), np.empty(0))
    ids, dist = _resolve_row(pts, tree, query_index, k)
    return NeighborList(ids, dist)


def k_nearest_batch(points, query_indices, k: int):
    """k-NN rows for many queries against one point set.

    Returns (ids, distances) of shape (len(query_indices), k_eff) with
    k_eff = min(k, N-1). Rows with any distance tie fall back to the exact
    (distance, id) resolution.
    """
    pts = _as_points(points)
    n = len(pts)
    qi = np.asarray(query_indices, dtype=np.int64)
    k_eff = min(k, n - 1)
    if k_eff <= 0 or len(qi) == 0:
        return (np.empty((len(qi), 0), dtype=np.int64), np.empty((len(qi), 0)))
    tree = cKDTree(pts)
    m = min(k_eff + 2, n)  # one spare column to see ties at the cut boundary
    dist, idx = tree.query(pts[qi], k=m)
    if m == 1:
        dist, idx = dist[:, None], idx[:, None]

    # drop exactly one self-entry per row (a zero-distance twin if the tree
    # crowded self out of the candidate list)
    is_self = idx == qi[:, None]
    has_self = is_self.any(axis=1)
    drop = np.where(has_self, np.argmax(is_self, axis=1), np.argmax(dist == 0.0, axis=1))
    cols = np.arange(m)
    keep = cols[None, :] != drop[:, None]
    kept_d = dist[keep].reshape(len(qi), m - 1)
    kept_i = idx[keep].reshape(len(qi), m - 1)

    ambiguous = ~has_self & ~(dist == 0.0).any(axis=1)
    if m - 1 > k_eff:
        ambiguous |= kept_d[:, k_eff - 1] == kept_d[:, k_eff]
    if k_eff > 1:
        ambiguous |= (np.diff(kept_d[:, :k_eff], axis=1) == 0).any(axis=1)

    out_i = kept_i[:, :k_eff].copy()
    out_d = kept_d[:, :k_eff].copy()
    for row in np.where(ambiguous)[0]:
        out_i[row], out_d[row] = _resolve_row(pts, tree, int(qi[row]), k_eff)
    return out_i, out_d
