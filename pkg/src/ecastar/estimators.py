"""Scikit-learn style estimator wrappers around the functional algorithms.

These classes follow the ``fit`` / ``predict`` / ``fit_predict`` +
``get_params`` contract so the clusterers drop into pipelines, grid searches
and any other tooling that speaks the sklearn estimator API.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from ._validation import as_point_matrix
from .baselines import KmConfig, kmeans
from .core import EcaConfig, reassign, run_eca
from .dataset import Dataset

__all__ = ["EcaStarClustering", "LloydKMeans"]


class EcaStarClustering(BaseEstimator, ClusterMixin):
    """Evolutionary centroid clustering with an adaptive number of clusters.

    Parameters
    ----------
    social_ranks : int, default=2
        Percentile bands per dimension; the initial cluster count is the
        number of occupied band-tuple cells (at most ``social_ranks ** d``).
    density_threshold : float, default=0.001
        Minimum member fraction below which a cluster folds into its nearest
        neighbour.
    alpha : float, default=1.001
        Stability exponent of the heavy-tailed mutation steps.
    max_cycles : int, default=50
        Iteration cap.
    crossover_type : str, default="uniform"
        Recombination flavour; only uniform crossover is defined.
    convergence_tolerance : float, default=1e-9
        Relative change in the fitness pair below which the run stops.
    levy_cap_fraction : float, default=0.1
        Mutation step cap as a fraction of each dimension's data range.
    random_state : int, default=0
        Seed for the run's random stream.

    Attributes
    ----------
    cluster_centers_ : ndarray of shape (n_clusters_, n_features)
    labels_ : ndarray of shape (n_samples,)
    n_clusters_ : int
    n_iter_ : int
    converged_ : bool
    intra_trace_, inter_trace_ : tuple of float
        Per-cycle fitness trajectory.
    """

    def __init__(
        self,
        social_ranks: int = 2,
        density_threshold: float = 0.001,
        alpha: float = 1.001,
        max_cycles: int = 50,
        crossover_type: str = "uniform",
        convergence_tolerance: float = 1e-9,
        levy_cap_fraction: float = 0.1,
        random_state: int = 0,
    ):
        self.social_ranks = social_ranks
        self.density_threshold = density_threshold
        self.alpha = alpha
        self.max_cycles = max_cycles
        self.crossover_type = crossover_type
        self.convergence_tolerance = convergence_tolerance
        self.levy_cap_fraction = levy_cap_fraction
        self.random_state = random_state

    def _config(self) -> EcaConfig:
        return EcaConfig(
            social_ranks=self.social_ranks,
            density_threshold=self.density_threshold,
            alpha=self.alpha,
            max_cycles=self.max_cycles,
            crossover_type=self.crossover_type,
            convergence_tolerance=self.convergence_tolerance,
            levy_cap_fraction=self.levy_cap_fraction,
        ).validate()

    def fit(self, X, y=None):
        data = Dataset(as_point_matrix(X))
        result = run_eca(data, self._config(), seed=self.random_state)
        self.cluster_centers_ = result.centroids
        self.labels_ = result.labels
        self.n_clusters_ = result.n_clusters
        self.n_iter_ = result.iterations
        self.converged_ = result.converged
        self.intra_trace_ = result.intra_trace
        self.inter_trace_ = result.inter_trace
        return self

    def predict(self, X) -> np.ndarray:
        if not hasattr(self, "cluster_centers_"):
            raise RuntimeError("fit must be called before predict")
        data = Dataset(as_point_matrix(X))
        return reassign(data, self.cluster_centers_)


class LloydKMeans(BaseEstimator, ClusterMixin):
    """Plain Lloyd k-means with random-point or k-means++ seeding.

    Attributes mirror sklearn's KMeans: ``cluster_centers_``, ``labels_``,
    ``inertia_`` (final SSE) and ``n_iter_``.
    """

    def __init__(
        self,
        n_clusters: int = 8,
        init: str = "kmeanspp",
        max_iter: int = 50,
        tolerance: float = 0.0,
        random_state: int = 0,
    ):
        self.n_clusters = n_clusters
        self.init = init
        self.max_iter = max_iter
        self.tolerance = tolerance
        self.random_state = random_state

    def fit(self, X, y=None):
        data = Dataset(as_point_matrix(X))
        config = KmConfig(
            k=self.n_clusters, max_iter=self.max_iter, init=self.init, tolerance=self.tolerance
        )
        result = kmeans(data, config, seed=self.random_state)
        self.cluster_centers_ = result.centroids
        self.labels_ = result.labels
        self.n_clusters_ = result.n_clusters
        self.inertia_ = result.sse_trace[-1] if result.sse_trace else 0.0
        self.n_iter_ = result.iterations
        self.converged_ = result.converged
        return self

    def predict(self, X) -> np.ndarray:
        if not hasattr(self, "cluster_centers_"):
            raise RuntimeError("fit must be called before predict")
        data = Dataset(as_point_matrix(X))
        return reassign(data, self.cluster_centers_)
