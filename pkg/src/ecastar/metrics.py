"""Internal and external cluster quality measures.

Internal measures (no ground truth needed): average within-cluster pairwise
distance, centroid-to-foreign-point distance, sum of squared errors and its
normalised/approximation-ratio forms.  External measures (against a
reference): centroid index, centroid similarity index and normalised mutual
information.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist, pdist

from ._validation import as_label_vector, as_point_matrix, check_same_length

__all__ = [
    "Partition",
    "Matching",
    "MetricReport",
    "intra_cluster",
    "inter_cluster",
    "mean_intra_cluster",
    "mean_inter_cluster",
    "sse",
    "nmse",
    "epsilon_ratio",
    "match_centroids",
    "build_matching",
    "centroid_index",
    "csi",
    "nmi",
    "relabel",
]


def relabel(labels) -> np.ndarray:
    """Map arbitrary cluster ids to contiguous 0..K-1, preserving id order."""
    arr = as_label_vector(labels)
    _, out = np.unique(arr, return_inverse=True)
    return out.astype(np.int64)


@dataclass(frozen=True)
class Partition:
    """A clustering of N points: contiguous labels plus optional centroids."""

    labels: np.ndarray
    centroids: np.ndarray | None = None

    def __post_init__(self):
        labs = as_label_vector(self.labels)
        uniq = np.unique(labs)
        if not np.array_equal(uniq, np.arange(uniq.size)):
            raise ValueError("labels must be contiguous ids in [0, K) with every id used")
        labs.flags.writeable = False
        object.__setattr__(self, "labels", labs)
        if self.centroids is not None:
            cents = as_point_matrix(self.centroids, name="centroids").copy()
            if cents.shape[0] != uniq.size:
                raise ValueError(f"{cents.shape[0]} centroid rows for {uniq.size} cluster ids")
            cents.flags.writeable = False
            object.__setattr__(self, "centroids", cents)

    @property
    def k(self) -> int:
        return int(self.labels.max()) + 1


@dataclass(frozen=True)
class Matching:
    """Total nearest-neighbour maps between two centroid (or cluster) sets.

    ``forward[i]`` is the target id matched to source id ``i``; ``backward[j]``
    the source id matched to target id ``j``.  Ties break to the lowest id.
    """

    forward: np.ndarray
    backward: np.ndarray


@dataclass(frozen=True)
class MetricReport:
    """Per-run bundle of internal/external measures and wall time."""

    sse: float
    nmse: float
    epsilon_ratio: float
    avg_intra: float
    avg_inter: float
    ci: Optional[int] = None
    csi: Optional[float] = None
    nmi: Optional[float] = None
    wall_seconds: float = 0.0

    def as_dict(self) -> dict:
        return {
            "sse": self.sse,
            "nmse": self.nmse,
            "epsilon_ratio": self.epsilon_ratio,
            "ci": self.ci,
            "csi": self.csi,
            "nmi": self.nmi,
            "avg_intra": self.avg_intra,
            "avg_inter": self.avg_inter,
            "wall_seconds": self.wall_seconds,
        }


def intra_cluster(members) -> float:
    """Average pairwise Euclidean distance within one cluster.

    Defined as 0 for a singleton, where the pair average is vacuous.
    """
    pts = as_point_matrix(members, name="members")
    if pts.shape[0] == 1:
        return 0.0
    return float(pdist(pts).mean())


def inter_cluster(a, b) -> float:
    """Mean distance from each cluster's points to the other cluster's mean.

    ``(sum_{x in A} d(x, v_b) + sum_{y in B} d(y, v_a)) / (|A| + |B|)`` where
    ``v_a``/``v_b`` are the cluster means.
    """
    pa = as_point_matrix(a, name="a")
    pb = as_point_matrix(b, name="b")
    va = pa.mean(axis=0)
    vb = pb.mean(axis=0)
    total = np.linalg.norm(pa - vb, axis=1).sum() + np.linalg.norm(pb - va, axis=1).sum()
    return float(total / (pa.shape[0] + pb.shape[0]))


def mean_intra_cluster(points, labels) -> float:
    """Mean of :func:`intra_cluster` over the clusters of a partition."""
    pts = as_point_matrix(points, name="points")
    labs = as_label_vector(labels, n=pts.shape[0])
    return float(np.mean([intra_cluster(pts[labs == cid]) for cid in np.unique(labs)]))


def mean_inter_cluster(points, labels) -> float:
    """Mean of :func:`inter_cluster` over unordered cluster pairs (0 for a
    single cluster)."""
    pts = as_point_matrix(points, name="points")
    labs = as_label_vector(labels, n=pts.shape[0])
    ids = np.unique(labs)
    if ids.size < 2:
        return 0.0
    vals = [
        inter_cluster(pts[labs == ids[a]], pts[labs == ids[b]])
        for a in range(ids.size)
        for b in range(a + 1, ids.size)
    ]
    return float(np.mean(vals))


def sse(points, centroids, labels=None, use_labels: bool = False) -> float:
    """Sum of squared distances from each point to its nearest centroid.

    With ``use_labels=True`` the point's assigned centroid is used instead
    (diagnostic variant); otherwise the nearest centroid is taken even when an
    assignment disagrees.
    """
    pts = as_point_matrix(points, name="points")
    cents = as_point_matrix(centroids, name="centroids")
    if cents.shape[1] != pts.shape[1]:
        raise ValueError("points and centroids have mismatched dimensionality")
    sq = cdist(pts, cents, metric="sqeuclidean")
    if use_labels:
        if labels is None:
            raise ValueError("use_labels=True requires labels")
        labs = as_label_vector(labels, n=pts.shape[0])
        if labs.min() < 0 or labs.max() >= cents.shape[0]:
            raise ValueError("labels reference missing centroid rows")
        return float(sq[np.arange(pts.shape[0]), labs].sum())
    return float(sq.min(axis=1).sum())


def nmse(sse_value: float, n: int, d: int) -> float:
    """Normalised mean squared error: SSE / (N * D)."""
    if n <= 0 or d <= 0:
        raise ValueError("n and d must be positive")
    return sse_value / (n * d)


def epsilon_ratio(sse_value: float, sse_opt: float = 0.001) -> float:
    """Approximation ratio (SSE - SSE_opt) / SSE_opt against an assumed optimum."""
    if sse_opt <= 0:
        raise ValueError("sse_opt must be positive")
    return (sse_value - sse_opt) / sse_opt


def match_centroids(source, target) -> np.ndarray:
    """Nearest ``target`` row for each ``source`` row; ties break to lowest id."""
    src = as_point_matrix(source, name="source")
    tgt = as_point_matrix(target, name="target")
    if src.shape[1] != tgt.shape[1]:
        raise ValueError("source and target centroids have mismatched dimensionality")
    return cdist(src, tgt, metric="sqeuclidean").argmin(axis=1).astype(np.int64)


def build_matching(solution_centroids, truth_centroids) -> Matching:
    """Bidirectional nearest-centroid matching between two centroid sets."""
    return Matching(
        forward=match_centroids(solution_centroids, truth_centroids),
        backward=match_centroids(truth_centroids, solution_centroids),
    )


def centroid_index(solution_centroids, truth_centroids) -> int:
    """Cluster-level mismatch count between two centroid sets.

    Maps each set onto the other by nearest centroid and counts, in each
    direction, the target centroids that receive no mapping; the result is
    the larger orphan count.  0 means the solution is structurally correct.
    """
    matching = build_matching(solution_centroids, truth_centroids)
    n_truth = np.asarray(truth_centroids).shape[0]
    n_solution = np.asarray(solution_centroids).shape[0]
    orphans_truth = n_truth - np.unique(matching.forward).size
    orphans_solution = n_solution - np.unique(matching.backward).size
    return int(max(orphans_truth, orphans_solution))


def _contingency(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ka = int(a.max()) + 1
    kb = int(b.max()) + 1
    table = np.zeros((ka, kb), dtype=np.int64)
    np.add.at(table, (a, b), 1)
    return table


def csi(
    solution_labels,
    truth_labels,
    solution_centroids=None,
    truth_centroids=None,
    matching: Matching | None = None,
) -> float:
    """Centroid similarity index: shared points between matched clusters.

    ``(sum_i |A_i ∩ B_m(i)| + sum_j |B_j ∩ A_m'(j)|) / (2N)`` where ``m`` and
    ``m'`` are the two directional matchings.  The matching comes from the
    centroid sets when given (or from ``matching``), otherwise from maximum
    label overlap.
    """
    a = relabel(solution_labels)
    b = relabel(truth_labels)
    check_same_length(a, b, "partitions")
    table = _contingency(a, b)
    if matching is None and solution_centroids is not None and truth_centroids is not None:
        matching = build_matching(solution_centroids, truth_centroids)
    if matching is not None:
        forward = np.asarray(matching.forward)
        backward = np.asarray(matching.backward)
    else:
        forward = table.argmax(axis=1)
        backward = table.argmax(axis=0)
    shared = table[np.arange(table.shape[0]), forward].sum()
    shared += table[backward, np.arange(table.shape[1])].sum()
    return float(shared) / (2.0 * a.size)


def nmi(labels_a, labels_b) -> float:
    """Normalised mutual information, 2I(A;B) / (H(A) + H(B)), in [0, 1].

    Entropies are in nats.  Two single-cluster partitions are defined to agree
    perfectly (1.0); if exactly one side is single-cluster the score is 0.
    """
    a = relabel(labels_a)
    b = relabel(labels_b)
    check_same_length(a, b, "partitions")
    n = a.size
    table = _contingency(a, b).astype(float) / n
    pa = table.sum(axis=1)
    pb = table.sum(axis=0)
    ha = -np.sum(pa * np.log(pa, where=pa > 0, out=np.zeros_like(pa)))
    hb = -np.sum(pb * np.log(pb, where=pb > 0, out=np.zeros_like(pb)))
    if ha == 0.0 and hb == 0.0:
        return 1.0
    mask = table > 0
    outer = np.outer(pa, pb)
    info = float(np.sum(table[mask] * np.log(table[mask] / outer[mask])))
    return 2.0 * info / float(ha + hb)
