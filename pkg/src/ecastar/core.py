"""The evolutionary clustering algorithm: percentile-rank initialisation,
quartile centroids, Levy-flight mutation, uniform crossover with a
mutation/crossover changeover, and density/diversity cluster merging.

One run is single-threaded and owns its state and random stream; multiple
runs with different seeds may proceed concurrently over a shared immutable
:class:`~ecastar.dataset.Dataset`.  Every operator is exposed as a module
function so the per-iteration invariants can be exercised directly.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .dataset import Dataset
from .stats import LevyParams, RandomStream, levy_step, percentile_ranks

__all__ = [
    "ConfigError",
    "EcaConfig",
    "ConditionalStats",
    "EcaState",
    "ClusteringResult",
    "initialize",
    "sample_historical",
    "conditional_distances",
    "compute_conditional",
    "select_elite",
    "mutate",
    "crossover",
    "mut_over",
    "reassign",
    "apply_centroids",
    "merge_clusters",
    "fitness",
    "run_eca",
]


class ConfigError(ValueError):
    """Raised when an algorithm configuration violates its invariants."""


@dataclass
class EcaConfig:
    """Tunable parameters of the evolutionary clustering run.

    ``social_ranks`` is the number of percentile bands per dimension; the
    initial cluster count is (at most) ``social_ranks ** d`` occupied cells.
    Pick it per problem, typically in 2..10.
    """

    social_ranks: int = 2
    density_threshold: float = 0.001
    alpha: float = 1.001
    max_cycles: int = 50
    crossover_type: str = "uniform"
    convergence_tolerance: float = 1e-9
    levy_cap_fraction: float = 0.1

    def validate(self) -> "EcaConfig":
        if self.social_ranks < 2:
            raise ConfigError(f"social_ranks must be >= 2, got {self.social_ranks}")
        if not 0.0 < self.density_threshold < 1.0:
            raise ConfigError(f"density_threshold must be in (0, 1), got {self.density_threshold}")
        if not 0.0 < self.alpha <= 2.0:
            raise ConfigError(f"alpha must be in (0, 2], got {self.alpha}")
        if self.max_cycles < 1:
            raise ConfigError(f"max_cycles must be >= 1, got {self.max_cycles}")
        if self.crossover_type != "uniform":
            raise ConfigError(f"unsupported crossover_type {self.crossover_type!r}")
        if self.convergence_tolerance < 0.0:
            raise ConfigError("convergence_tolerance must be >= 0")
        if not 0.0 < self.levy_cap_fraction <= 1.0:
            raise ConfigError(f"levy_cap_fraction must be in (0, 1], got {self.levy_cap_fraction}")
        return self


@dataclass
class ConditionalStats:
    """Per-cluster centroid-conditional distances for the current and
    historical centroid sets, cached once per cycle."""

    intra_current: np.ndarray
    inter_current: np.ndarray
    intra_old: np.ndarray
    inter_old: np.ndarray


@dataclass
class EcaState:
    """Evolving clustering state.

    ``ids`` lists the live cluster ids in ascending order; ``centroids``,
    ``old_centroids`` and ``runner_up_centroids`` rows are aligned with it.
    ``assignments`` holds one live id per point.  ``mean_rank`` keeps each
    point's average percentile rank across dimensions as a diagnostic; it
    does not drive assignment.
    """

    assignments: np.ndarray
    ids: np.ndarray
    centroids: np.ndarray
    old_centroids: np.ndarray
    iteration: int = 0
    initial_cells: int = 0
    mean_rank: np.ndarray | None = None
    cond: ConditionalStats | None = None
    runner_up_centroids: np.ndarray | None = None
    prev_intra: float | None = None
    prev_inter: float | None = None

    @property
    def k(self) -> int:
        return int(self.ids.size)

    def members_of(self, cluster_id: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == cluster_id)


@dataclass(frozen=True)
class ClusteringResult:
    """Outcome of one clustering run.

    ``labels`` are contiguous ids in [0, n_clusters); ``intra_trace`` and
    ``inter_trace`` record the per-cycle fitness of the evolutionary run
    (k-means fills ``sse_trace`` with its own objective instead).
    """

    centroids: np.ndarray
    labels: np.ndarray
    n_clusters: int
    intra_trace: tuple[float, ...]
    inter_trace: tuple[float, ...]
    sse_trace: tuple[float, ...]
    iterations: int
    converged: bool
    wall_seconds: float

    def __post_init__(self):
        cents = np.asarray(self.centroids, dtype=float).copy()
        labs = np.asarray(self.labels, dtype=np.int64).copy()
        cents.flags.writeable = False
        labs.flags.writeable = False
        object.__setattr__(self, "centroids", cents)
        object.__setattr__(self, "labels", labs)
        distinct = np.unique(labs).size
        if not (self.n_clusters == distinct == cents.shape[0]):
            raise ValueError(
                f"inconsistent result: n_clusters={self.n_clusters}, "
                f"{distinct} distinct labels, {cents.shape[0]} centroid rows"
            )


def _iqm_centroid(points: np.ndarray) -> np.ndarray:
    """Column-wise interquartile mean of a member block (vectorised)."""
    if points.shape[0] == 1:
        return points[0].astype(float).copy()
    q1, q3 = np.quantile(points, (0.25, 0.75), axis=0)
    inside = (points >= q1) & (points <= q3)
    counts = inside.sum(axis=0)
    sums = np.where(inside, points, 0.0).sum(axis=0)
    out = np.where(counts > 0, sums / np.maximum(counts, 1), points.mean(axis=0))
    return out


def _recompute_centroids(dataset: Dataset, assignments: np.ndarray, ids: np.ndarray) -> np.ndarray:
    out = np.empty((ids.size, dataset.d), dtype=float)
    for r, cid in enumerate(ids):
        out[r] = _iqm_centroid(dataset.points[assignments == cid])
    return out


def initialize(dataset: Dataset, config: EcaConfig, rng: RandomStream | None = None) -> EcaState:
    """Build the initial state from per-dimension percentile-rank bands.

    Each point's rank in every dimension is binned into ``social_ranks``
    bands; the band tuple, read as a mixed-radix index (dimension 0 most
    significant), is the point's cell.  Only occupied cells materialise, so
    high-dimensional data never allocates the full cell lattice.  Cells whose
    density falls below ``density_threshold`` are folded into the nearest
    occupied cell, and centroids are the per-dimension interquartile means.
    """
    config.validate()
    s = config.social_ranks
    ranks = np.empty_like(dataset.points)
    for j in range(dataset.d):
        ranks[:, j] = percentile_ranks(dataset.points[:, j])
    bins = np.minimum((ranks * s / 100.0).astype(np.int64), s - 1)
    # np.unique sorts rows lexicographically, i.e. by ascending mixed-radix
    # cell index with dimension 0 most significant.
    _, assignments = np.unique(bins, axis=0, return_inverse=True)
    assignments = assignments.astype(np.int64).reshape(-1)
    ids = np.unique(assignments)
    centroids = _recompute_centroids(dataset, assignments, ids)
    initial_cells = int(ids.size)

    # Fold under-dense cells into their nearest occupied cell, ascending id,
    # re-checking density against the evolving state.
    live = [int(c) for c in ids]
    for cid in list(live):
        if len(live) <= 1:
            break
        members = np.flatnonzero(assignments == cid)
        if members.size == 0 or members.size / dataset.n >= config.density_threshold:
            continue
        row = live.index(cid)
        others = [c for c in live if c != cid]
        other_rows = [live.index(c) for c in others]
        dists = np.linalg.norm(centroids[other_rows] - centroids[row], axis=1)
        target = others[int(dists.argmin())]
        assignments[members] = target
        live.remove(cid)
        centroids = np.delete(centroids, row, axis=0)
        centroids[live.index(target)] = _iqm_centroid(dataset.points[assignments == target])

    ids = np.asarray(live, dtype=np.int64)
    return EcaState(
        assignments=assignments,
        ids=ids,
        centroids=centroids,
        old_centroids=centroids.copy(),
        iteration=0,
        initial_cells=initial_cells,
        mean_rank=ranks.mean(axis=1),
    )


def sample_historical(state: EcaState, dataset: Dataset, rng: RandomStream) -> np.ndarray:
    """Draw historical centroids uniformly between each cluster's member
    quartiles, per dimension; a singleton cluster yields its member exactly."""
    out = np.empty_like(state.centroids)
    for r, cid in enumerate(state.ids):
        block = dataset.points[state.assignments == cid]
        lo, hi = np.quantile(block, (0.25, 0.75), axis=0)
        out[r] = rng.uniform(lo, hi, size=dataset.d)
    return out


def conditional_distances(state: EcaState, dataset: Dataset, candidate: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-cluster (intra, inter) distances conditional on candidate centroids.

    ``intra[r]`` is the mean distance from cluster r's members to candidate
    row r; ``inter[r]`` the mean distance from candidate row r to all
    non-members (0 when the cluster holds every point).
    """
    dists = cdist(dataset.points, candidate)
    intra = np.empty(state.k)
    inter = np.empty(state.k)
    for r, cid in enumerate(state.ids):
        mask = state.assignments == cid
        intra[r] = dists[mask, r].mean()
        inter[r] = dists[~mask, r].mean() if not mask.all() else 0.0
    return intra, inter


def compute_conditional(state: EcaState, dataset: Dataset) -> ConditionalStats:
    """Cache conditional distances for the current and historical centroids."""
    intra_c, inter_c = conditional_distances(state, dataset, state.centroids)
    intra_o, inter_o = conditional_distances(state, dataset, state.old_centroids)
    state.cond = ConditionalStats(intra_c, inter_c, intra_o, inter_o)
    return state.cond


def select_elite(state: EcaState, dataset: Dataset) -> np.ndarray:
    """Keep, per cluster, whichever of the current and historical centroids
    has the smaller conditional intra distance (the historical one on ties).

    The winner is stored back as the working centroid set; the rejected
    parent is retained as the mutation direction anchor.
    """
    if state.cond is None:
        compute_conditional(state, dataset)
    won = state.cond.intra_current < state.cond.intra_old
    selected = np.where(won[:, None], state.centroids, state.old_centroids)
    runner_up = np.where(won[:, None], state.old_centroids, state.centroids)
    state.centroids = selected
    state.runner_up_centroids = runner_up
    return selected


def mutate(state: EcaState, dataset: Dataset, config: EcaConfig, rng: RandomStream) -> np.ndarray:
    """Levy-flight mutation of the working centroids.

    Each component steps from the kept centroid toward the rejected parent,
    scaled by an independent heavy-tailed draw capped at
    ``levy_cap_fraction`` of that dimension's data range.
    """
    if state.runner_up_centroids is None:
        raise RuntimeError("mutate requires select_elite to have run this cycle")
    ranges = dataset.bounds[:, 1] - dataset.bounds[:, 0]
    params = LevyParams(alpha=config.alpha, scale=1.0, cap=config.levy_cap_fraction * ranges)
    steps = levy_step(params, rng, size=(state.k, dataset.d))
    direction = state.runner_up_centroids - state.centroids
    return state.centroids + steps * direction


def crossover(state: EcaState, config: EcaConfig, rng: RandomStream) -> np.ndarray:
    """Uniform crossover: per component, a fair coin picks the working or the
    historical centroid value."""
    if config.crossover_type != "uniform":
        raise ConfigError(f"unsupported crossover_type {config.crossover_type!r}")
    take_current = rng.random(state.centroids.shape) < 0.5
    return np.where(take_current, state.centroids, state.old_centroids)


def mut_over(
    state: EcaState,
    dataset: Dataset,
    mutant: np.ndarray,
    crossed: np.ndarray,
    rng: RandomStream,
) -> np.ndarray:
    """Changeover between mutation and crossover, plus boundary control.

    A cluster takes its mutant when the historical centroid had the larger
    conditional inter distance, otherwise its crossover child.  Components
    outside the per-dimension data range are not clipped but regenerated
    uniformly inside it, preserving search diversity.
    """
    if state.cond is None:
        raise RuntimeError("mut_over requires conditional distances for this cycle")
    take_mutant = state.cond.inter_old > state.cond.inter_current
    out = np.where(take_mutant[:, None], mutant, crossed)
    lo = dataset.bounds[:, 0]
    hi = dataset.bounds[:, 1]
    outside = (out < lo) | (out > hi)
    if np.any(outside):
        lo_full = np.broadcast_to(lo, out.shape)
        hi_full = np.broadcast_to(hi, out.shape)
        out = out.copy()
        out[outside] = rng.uniform(lo_full[outside], hi_full[outside], size=int(outside.sum()))
    return out


def reassign(dataset: Dataset, centroids: np.ndarray, ids: np.ndarray | None = None) -> np.ndarray:
    """Assign every point to its nearest centroid (lowest id on exact ties).

    Returns live cluster ids per point; rows of ``centroids`` map to ``ids``
    (or to 0..K-1 when ``ids`` is omitted).
    """
    centroids = np.asarray(centroids, dtype=float)
    if centroids.ndim != 2 or centroids.shape[0] < 1:
        raise ValueError("reassign requires at least one centroid row")
    rows = cdist(dataset.points, centroids, metric="sqeuclidean").argmin(axis=1)
    if ids is None:
        return rows.astype(np.int64)
    return np.asarray(ids, dtype=np.int64)[rows]


def apply_centroids(state: EcaState, dataset: Dataset, centroids: np.ndarray) -> EcaState:
    """Adopt trial centroids: reassign points and drop emptied clusters."""
    assignments = reassign(dataset, centroids, state.ids)
    keep = np.array([bool(np.any(assignments == cid)) for cid in state.ids])
    state.assignments = assignments
    state.ids = state.ids[keep]
    state.centroids = np.asarray(centroids, dtype=float)[keep]
    state.old_centroids = state.old_centroids[keep]
    if state.runner_up_centroids is not None:
        state.runner_up_centroids = state.runner_up_centroids[keep]
    state.cond = None
    return state


def _avg_pairwise(points: np.ndarray) -> float:
    if points.shape[0] < 2:
        return 0.0
    return float(pdist(points).mean())


def merge_clusters(state: EcaState, dataset: Dataset, config: EcaConfig) -> EcaState:
    """Merge interconnected and under-dense clusters, then refresh centroids.

    For each live pair (ascending ids, against the evolving state) the pair
    merges into the smaller id when the minimum cross-cluster point distance
    does not exceed the larger of the two clusters' average intra distances.
    Afterwards clusters below the density threshold fold into their nearest
    neighbour by centroid distance, and all centroids are recomputed as
    per-dimension interquartile means.
    """
    points = dataset.points
    members: dict[int, np.ndarray] = {
        int(cid): np.flatnonzero(state.assignments == cid) for cid in state.ids
    }
    radius: dict[int, float] = {}

    def avg_intra_of(cid: int) -> float:
        if cid not in radius:
            radius[cid] = _avg_pairwise(points[members[cid]])
        return radius[cid]

    order = sorted(members)
    dead: set[int] = set()
    for pos, i in enumerate(order):
        if i in dead:
            continue
        for j in order[pos + 1 :]:
            if j in dead or i in dead:
                continue
            d_min = float(cdist(points[members[i]], points[members[j]]).min())
            sigma = min(d_min - avg_intra_of(i), d_min - avg_intra_of(j))
            if sigma <= 0.0:
                members[i] = np.concatenate([members[i], members[j]])
                del members[j]
                dead.add(j)
                radius.pop(i, None)

    # Fold under-dense survivors into their nearest neighbour by centroid.
    centroid_cache: dict[int, np.ndarray] = {}

    def centroid_of(cid: int) -> np.ndarray:
        if cid not in centroid_cache:
            centroid_cache[cid] = _iqm_centroid(points[members[cid]])
        return centroid_cache[cid]

    for cid in sorted(members):
        if cid not in members or len(members) <= 1:
            continue
        if members[cid].size / dataset.n >= config.density_threshold:
            continue
        others = sorted(c for c in members if c != cid)
        dists = [float(np.linalg.norm(centroid_of(c) - centroid_of(cid))) for c in others]
        target = others[int(np.argmin(dists))]
        members[target] = np.concatenate([members[target], members[cid]])
        del members[cid]
        centroid_cache.pop(target, None)

    ids = np.asarray(sorted(members), dtype=np.int64)
    assignments = np.empty(dataset.n, dtype=np.int64)
    for cid in sorted(members):
        assignments[members[cid]] = cid
    keep = np.isin(state.ids, ids)
    state.assignments = assignments
    state.old_centroids = state.old_centroids[keep]
    state.ids = ids
    state.centroids = _recompute_centroids(dataset, assignments, ids)
    state.runner_up_centroids = None
    state.cond = None
    return state


def _relative_change(new: float, old: float) -> float:
    if old == 0.0:
        return 0.0 if new == 0.0 else math.inf
    return abs(new - old) / abs(old)


def fitness(state: EcaState, dataset: Dataset, tolerance: float = 1e-9) -> tuple[float, float, bool]:
    """Average within-cluster spread, average between-cluster distance and
    whether both are unchanged (within relative ``tolerance``) since the
    previous cycle.

    The intra term averages each cluster's mean pairwise distance; the inter
    term averages, over unordered cluster pairs, the mean distance from each
    cluster's points to the other cluster's mean (0 for a single cluster).
    """
    points = dataset.points
    k = state.k
    intra_vals = np.empty(k)
    sizes = np.empty(k, dtype=np.int64)
    means = np.empty((k, dataset.d))
    for r, cid in enumerate(state.ids):
        block = points[state.assignments == cid]
        intra_vals[r] = _avg_pairwise(block)
        sizes[r] = block.shape[0]
        means[r] = block.mean(axis=0)
    avg_intra = float(intra_vals.mean())

    if k < 2:
        avg_inter = 0.0
    else:
        dist_to_means = cdist(points, means)
        rows = np.searchsorted(state.ids, state.assignments)
        sums = np.zeros((k, k))
        np.add.at(sums, rows, dist_to_means)
        total = 0.0
        for a in range(k):
            for b in range(a + 1, k):
                total += (sums[a, b] + sums[b, a]) / (sizes[a] + sizes[b])
        avg_inter = float(total / (k * (k - 1) / 2))

    converged = False
    if state.prev_intra is not None and state.prev_inter is not None:
        converged = (
            _relative_change(avg_intra, state.prev_intra) <= tolerance
            and _relative_change(avg_inter, state.prev_inter) <= tolerance
        )
    return avg_intra, avg_inter, converged


def run_eca(dataset: Dataset, config: EcaConfig | None = None, seed: int | RandomStream = 0) -> ClusteringResult:
    """Run the full evolutionary clustering loop on a dataset.

    Deterministic: the same (dataset, config, seed) always yields the same
    result.  ``seed`` may be an integer or an existing :class:`RandomStream`
    (as handed out by the benchmark harness).
    """
    config = (config or EcaConfig()).validate()
    rng = seed if isinstance(seed, RandomStream) else RandomStream(int(seed))
    start = time.perf_counter()

    state = initialize(dataset, config, rng)
    intra_trace: list[float] = []
    inter_trace: list[float] = []
    converged = False
    cycles = 0
    for cycle in range(config.max_cycles):
        state.old_centroids = sample_historical(state, dataset, rng)
        compute_conditional(state, dataset)
        select_elite(state, dataset)
        mutant = mutate(state, dataset, config, rng)
        crossed = crossover(state, config, rng)
        trial = mut_over(state, dataset, mutant, crossed, rng)
        apply_centroids(state, dataset, trial)
        merge_clusters(state, dataset, config)
        avg_intra, avg_inter, converged = fitness(state, dataset, config.convergence_tolerance)
        intra_trace.append(avg_intra)
        inter_trace.append(avg_inter)
        state.prev_intra = avg_intra
        state.prev_inter = avg_inter
        cycles = cycle + 1
        state.iteration = cycles
        if converged:
            break

    wall = time.perf_counter() - start
    order = np.argsort(state.ids)
    labels = np.searchsorted(state.ids[order], state.assignments)
    return ClusteringResult(
        centroids=state.centroids[order],
        labels=labels,
        n_clusters=int(state.ids.size),
        intra_trace=tuple(intra_trace),
        inter_trace=tuple(inter_trace),
        sse_trace=(),
        iterations=cycles,
        converged=converged,
        wall_seconds=wall,
    )
