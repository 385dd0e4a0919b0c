"""Lloyd k-means and k-means++ seeding as comparison algorithms.

Both produce the same :class:`~ecastar.core.ClusteringResult` shape as the
evolutionary algorithm; k-means records its own objective (SSE) per iteration
in ``sse_trace``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .core import ClusteringResult, ConfigError
from .dataset import Dataset
from .stats import RandomStream

__all__ = ["KmConfig", "kmeanspp_seed", "random_seed", "kmeans"]


@dataclass
class KmConfig:
    """Parameters of a Lloyd k-means run."""

    k: int = 2
    max_iter: int = 50
    init: str = "kmeanspp"
    tolerance: float = 0.0

    def validate(self, n: int | None = None) -> "KmConfig":
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if n is not None and self.k > n:
            raise ConfigError(f"k={self.k} exceeds the {n} available points")
        if self.max_iter < 1:
            raise ConfigError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.init not in ("random_points", "kmeanspp"):
            raise ConfigError(f"unknown init {self.init!r}; use 'random_points' or 'kmeanspp'")
        if self.tolerance < 0.0:
            raise ConfigError("tolerance must be >= 0")
        return self


def random_seed(dataset: Dataset, k: int, rng: RandomStream) -> np.ndarray:
    """k distinct data points chosen uniformly without replacement."""
    if k > dataset.n:
        raise ConfigError(f"k={k} exceeds the {dataset.n} available points")
    idx = rng.choice(dataset.n, size=k, replace=False)
    return dataset.points[np.sort(np.asarray(idx))].copy()


def kmeanspp_seed(dataset: Dataset, k: int, rng: RandomStream) -> np.ndarray:
    """k-means++ seeding: spread initial centroids apart.

    The first centroid is a uniform point; each next one is drawn with
    probability proportional to its squared distance to the nearest centroid
    chosen so far.  Exact duplicates are redrawn up to n times, then accepted
    (only possible when the data itself has coincident points).
    """
    if k > dataset.n:
        raise ConfigError(f"k={k} exceeds the {dataset.n} available points")
    points = dataset.points
    chosen = [int(rng.integers(0, dataset.n))]
    best_sq = cdist(points, points[chosen[-1]][None, :], metric="sqeuclidean").ravel()
    while len(chosen) < k:
        total = best_sq.sum()
        if total > 0.0:
            probs = best_sq / total
            idx = int(rng.choice(dataset.n, p=probs))
        else:
            # All remaining points coincide with a chosen centroid.
            idx = int(rng.integers(0, dataset.n))
        attempts = 0
        while any(np.array_equal(points[idx], points[c]) for c in chosen) and attempts < dataset.n:
            if total > 0.0:
                idx = int(rng.choice(dataset.n, p=probs))
            else:
                idx = int(rng.integers(0, dataset.n))
            attempts += 1
        chosen.append(idx)
        sq = cdist(points, points[idx][None, :], metric="sqeuclidean").ravel()
        best_sq = np.minimum(best_sq, sq)
    return points[chosen].copy()


def kmeans(
    dataset: Dataset,
    config: KmConfig,
    seed: int | RandomStream = 0,
    initial_centroids=None,
) -> ClusteringResult:
    """Lloyd's algorithm: alternate nearest-centroid assignment and mean update.

    Stops at an assignment fixpoint, when the relative SSE change drops to
    ``tolerance``, or after ``max_iter`` sweeps.  Emptied clusters are
    re-seeded at the point farthest from its assigned centroid, keeping k
    constant; the recorded SSE trace is non-increasing.  ``initial_centroids``
    overrides the seeding (useful for controlled experiments).
    """
    config.validate(n=dataset.n)
    rng = seed if isinstance(seed, RandomStream) else RandomStream(int(seed))
    start = time.perf_counter()

    points = dataset.points
    if initial_centroids is not None:
        centroids = np.asarray(initial_centroids, dtype=float).copy()
        if centroids.shape != (config.k, dataset.d):
            raise ConfigError(
                f"initial_centroids must have shape ({config.k}, {dataset.d}), got {centroids.shape}"
            )
    elif config.init == "kmeanspp":
        centroids = kmeanspp_seed(dataset, config.k, rng)
    else:
        centroids = random_seed(dataset, config.k, rng)

    labels = None
    sse_trace: list[float] = []
    converged = False
    iterations = 0
    for _ in range(config.max_iter):
        sq = cdist(points, centroids, metric="sqeuclidean")
        new_labels = sq.argmin(axis=1)
        point_cost = sq[np.arange(dataset.n), new_labels]
        sse_trace.append(float(point_cost.sum()))
        iterations += 1

        if labels is not None and np.array_equal(new_labels, labels):
            converged = True
            labels = new_labels
            break
        if len(sse_trace) >= 2:
            prev, cur = sse_trace[-2], sse_trace[-1]
            if prev > 0 and abs(cur - prev) / prev <= config.tolerance:
                converged = True
                labels = new_labels
                break
        labels = new_labels

        used = np.zeros(dataset.n, dtype=bool)
        for cid in range(config.k):
            mask = labels == cid
            if np.any(mask):
                centroids[cid] = points[mask].mean(axis=0)
            else:
                # Re-seed at the costliest unused point; keeps k constant and
                # never increases the objective.
                cost = np.where(used, -np.inf, point_cost)
                far = int(cost.argmax())
                centroids[cid] = points[far]
                used[far] = True

    wall = time.perf_counter() - start
    live = np.unique(labels)
    relabeled = np.searchsorted(live, labels)
    return ClusteringResult(
        centroids=centroids[live],
        labels=relabeled,
        n_clusters=int(live.size),
        intra_trace=(),
        inter_trace=(),
        sse_trace=tuple(sse_trace),
        iterations=iterations,
        converged=converged,
        wall_seconds=wall,
    )
