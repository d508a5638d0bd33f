"""Clustering backends for region discovery.

Both algorithms run on a joint embedding of min-max-normalized features
and the (weighted, normalized) black-box prediction, so clusters that
differ only in output behaviour still separate.  Weight 0 recovers
input-only clustering.

k-means is written out here because its determinism contract is exact:
greedy farthest-point initialization from one seeded draw, Lloyd updates
to a 1e-9 center-movement tolerance, lowest-index tie-breaking, and a
fixed empty-cluster repair.  Ward agglomeration is delegated to scipy's
linkage/fcluster, cut at k clusters.

Labels from either backend are relabelled by first appearance, so label
0 is always the cluster of the earliest sample.
"""

from __future__ import annotations

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage

from .oracles import apply_minmax, minmax_params

ALGORITHMS = ("kmeans", "agglomerative-ward")


def joint_embedding(X, preds, output_weight: float) -> np.ndarray:
    """Stack normalized features with the weighted normalized prediction."""
    if output_weight < 0:
        raise ValueError("output_weight must be non-negative")
    X = np.asarray(X, dtype=float)
    preds = np.asarray(preds, dtype=float).reshape(-1, 1)
    Z_x = apply_minmax(X, minmax_params(X))
    Z_y = apply_minmax(preds, minmax_params(preds)) * output_weight
    return np.hstack([Z_x, Z_y])


def _relabel_by_first_appearance(labels: np.ndarray) -> np.ndarray:
    mapping: dict[int, int] = {}
    out = np.empty_like(labels)
    for i, lab in enumerate(labels):
        if lab not in mapping:
            mapping[lab] = len(mapping)
        out[i] = mapping[lab]
    return out


def _farthest_point_init(Z: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    centers = [int(rng.integers(Z.shape[0]))]
    d2 = ((Z - Z[centers[0]]) ** 2).sum(axis=1)
    while len(centers) < k:
        nxt = int(np.argmax(d2))  # argmax takes the lowest index on ties
        centers.append(nxt)
        d2 = np.minimum(d2, ((Z - Z[nxt]) ** 2).sum(axis=1))
    return Z[centers].copy()


def kmeans_labels(
    Z,
    k: int,
    seed: int = 0,
    tol: float = 1e-9,
    max_iter: int = 300,
) -> np.ndarray:
    """Seeded Lloyd k-means; deterministic labels for a given seed."""
    Z = np.asarray(Z, dtype=float)
    n = Z.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} is outside [1, {n}]")
    rng = np.random.default_rng(seed)
    centers = _farthest_point_init(Z, k, rng)
    labels = np.zeros(n, dtype=int)
    for _ in range(max_iter):
        d2 = ((Z[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = np.argmin(d2, axis=1)  # ties go to the lower cluster index
        # Empty-cluster repair: hand the cluster the sample farthest from its
        # own center; on ties the highest index moves, so low indices stay put.
        counts = np.bincount(labels, minlength=k)
        for c in range(k):
            if counts[c] > 0:
                continue
            dist_own = d2[np.arange(n), labels]
            movable = np.flatnonzero(counts[labels] > 1)
            dd = dist_own[movable]
            choice = int(movable[np.flatnonzero(dd == dd.max()).max()])
            counts[labels[choice]] -= 1
            labels[choice] = c
            counts[c] = 1
        new_centers = np.stack([Z[labels == c].mean(axis=0) for c in range(k)])
        movement = float(np.sqrt(((new_centers - centers) ** 2).sum(axis=1)).max())
        centers = new_centers
        if movement <= tol:
            break
    return _relabel_by_first_appearance(labels)


def ward_labels(Z, k: int) -> np.ndarray:
    """Agglomerative clustering with Ward linkage, cut at k clusters."""
    Z = np.asarray(Z, dtype=float)
    n = Z.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} is outside [1, {n}]")
    if k == 1:
        return np.zeros(n, dtype=int)
    if k == n:
        return np.arange(n)
    labels = fcluster(linkage(Z, method="ward"), t=k, criterion="maxclust")
    if len(np.unique(labels)) < k:
        raise ValueError(f"ward linkage could not form {k} distinct clusters")
    return _relabel_by_first_appearance(labels.astype(int))


def cluster_labels(Z, k: int, algorithm: str, seed: int = 0) -> np.ndarray:
    if algorithm == "kmeans":
        return kmeans_labels(Z, k, seed=seed)
    if algorithm == "agglomerative-ward":
        return ward_labels(Z, k)
    raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {algorithm!r}")
