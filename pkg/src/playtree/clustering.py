"""Seeded K-means and the cluster-count selection score."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class KMeansResult:
    centers: np.ndarray  # (k, d)
    labels: np.ndarray   # (n,)
    wce: float           # mean point-to-center Euclidean distance


def _assign(x, centers):
    # argmin over squared distances; ties resolve to the lowest index
    d = (np.einsum("nd,nd->n", x, x)[:, None]
         + np.einsum("kd,kd->k", centers, centers)[None, :]
         - 2.0 * x @ centers.T)
    return np.argmin(d, axis=1)


def _farthest_point_init(x, k, rng):
    n = x.shape[0]
    idx = [int(rng.integers(n))]
    d = np.linalg.norm(x - x[idx[0]], axis=1)
    for _ in range(k - 1):
        nxt = int(np.argmax(d))
        idx.append(nxt)
        d = np.minimum(d, np.linalg.norm(x - x[nxt], axis=1))
    return x[idx].copy()


def kmeans(x: np.ndarray, k: int, rng: np.random.Generator,
           max_iter: int = 100, n_init: int = 1) -> KMeansResult:
    """K-means with seeded farthest-point init.

    Converges when assignments stabilize; empty clusters are re-seeded from
    the point farthest from its assigned center.  With ``n_init > 1`` the
    restart with the lowest WCE wins.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range for {n} points")
    best = None
    for _ in range(n_init):
        centers = _farthest_point_init(x, k, rng)
        labels = None
        for _ in range(max_iter):
            new_labels = _assign(x, centers)
            if labels is not None and np.array_equal(new_labels, labels):
                break
            labels = new_labels
            dists = np.linalg.norm(x - centers[labels], axis=1)
            for j in range(k):
                members = labels == j
                if members.any():
                    centers[j] = x[members].mean(axis=0)
                else:
                    far = int(np.argmax(dists))
                    centers[j] = x[far]
                    dists[far] = 0.0
        labels = _assign(x, centers)
        w = float(np.linalg.norm(x - centers[labels], axis=1).mean())
        if best is None or w < best.wce:
            best = KMeansResult(centers=centers, labels=labels, wce=w)
    return best


def partition_score(x: np.ndarray, labels: np.ndarray,
                    centers: np.ndarray) -> float:
    """Silhouette-like separation score of a clustering.

    Mean over points of (d_neighbor - d_own) / d_neighbor where d_own is
    the distance to the own cluster mean and d_neighbor the distance to the
    nearest other cluster mean.  A point with both distances zero
    contributes 0; d_neighbor zero with d_own positive contributes -1.
    """
    k = centers.shape[0]
    if k < 2:
        raise ValueError("partition score needs at least 2 clusters")
    counts = np.bincount(labels, minlength=k)
    if (counts == 0).any():
        raise ValueError("every cluster must be non-empty")
    d = np.sqrt(np.maximum(
        np.einsum("nd,nd->n", x, x)[:, None]
        + np.einsum("kd,kd->k", centers, centers)[None, :]
        - 2.0 * x @ centers.T, 0.0))
    n = x.shape[0]
    d_own = d[np.arange(n), labels]
    d_masked = d.copy()
    d_masked[np.arange(n), labels] = np.inf
    d_nb = d_masked.min(axis=1)
    contrib = np.zeros(n)
    pos = d_nb > 0
    contrib[pos] = (d_nb[pos] - d_own[pos]) / d_nb[pos]
    degenerate = (~pos) & (d_own > 0)
    contrib[degenerate] = -1.0
    return float(contrib.mean())


@dataclass
class Partition:
    labels: np.ndarray
    centers: np.ndarray
    k: int
    score: float


def choose_partition(x: np.ndarray, k_range: tuple[int, int],
                     rng: np.random.Generator) -> Partition | None:
    """Pick the K in k_range whose K-means clustering maximizes the
    separation score; ties go to the smallest K.  Returns None when the
    data cannot be split (all candidate clusterings degenerate)."""
    n = x.shape[0]
    k_lo, k_hi = k_range
    if k_lo < 2:
        raise ValueError("k range must start at 2 or more")
    if np.allclose(x, x[0]):
        return None
    best = None
    for k in range(k_lo, min(k_hi, n) + 1):
        result = kmeans(x, k, rng)
        counts = np.bincount(result.labels, minlength=k)
        if (counts == 0).any():
            continue
        score = partition_score(x, result.labels, result.centers)
        if best is None or score > best.score:
            best = Partition(labels=result.labels, centers=result.centers,
                             k=k, score=score)
    return best
