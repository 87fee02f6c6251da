"""Chamfer distance between point sets (mean squared nearest-neighbour distance, symmetrized)."""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree


def _nearest_sq_brute(a, b, chunk=2048):
    out = np.empty(len(a))
    for s in range(0, len(a), chunk):
        d2 = np.sum((a[s:s + chunk, None, :] - b[None, :, :]) ** 2, axis=2)
        out[s:s + chunk] = d2.min(axis=1)
    return out


def _nearest_sq_tree(a, b, k=4):
    # the tree only proposes candidates; squared distances are recomputed exactly
    # as in the brute-force path so both agree bit for bit
    k = min(k, len(b))
    _, idx = cKDTree(b).query(a, k=k)
    idx = np.asarray(idx).reshape(len(a), k)
    d2 = np.sum((a[:, None, :] - b[idx]) ** 2, axis=2)
    return d2.min(axis=1)


def chamfer_distance(a, b, method: str = "tree") -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim == 1:
        a = a[None]
    if b.ndim == 1:
        b = b[None]
    if len(a) == 0 or len(b) == 0:
        raise ValueError("chamfer distance needs two non-empty point sets")
    nearest = _nearest_sq_brute if method == "brute" else _nearest_sq_tree
    return 0.5 * (float(np.mean(nearest(a, b))) + float(np.mean(nearest(b, a))))
