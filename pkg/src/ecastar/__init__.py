"""Evolutionary centroid clustering with percentile-rank initialisation,
Levy-flight mutation and density-aware merging, plus k-means baselines, a
cluster-quality metric suite and a seeded benchmark harness."""

from .baselines import KmConfig, kmeans, kmeanspp_seed
from .core import ClusteringResult, ConfigError, EcaConfig, run_eca
from .dataset import (
    Dataset,
    DatasetFormatError,
    DatasetMeta,
    GroundTruth,
    SuiteEntry,
    bounds,
    generate_blobs,
    load_ground_truth,
    load_points,
    load_suite,
    save_points,
)
from .estimators import EcaStarClustering, LloydKMeans
from .metrics import (
    MetricReport,
    centroid_index,
    csi,
    epsilon_ratio,
    inter_cluster,
    intra_cluster,
    nmi,
    nmse,
    sse,
)
from .stats import LevyParams, RandomStream

__version__ = "0.1.0"

__all__ = [
    "ClusteringResult",
    "ConfigError",
    "Dataset",
    "DatasetFormatError",
    "DatasetMeta",
    "EcaConfig",
    "EcaStarClustering",
    "GroundTruth",
    "KmConfig",
    "LevyParams",
    "LloydKMeans",
    "MetricReport",
    "RandomStream",
    "SuiteEntry",
    "bounds",
    "centroid_index",
    "csi",
    "epsilon_ratio",
    "generate_blobs",
    "inter_cluster",
    "intra_cluster",
    "kmeans",
    "kmeanspp_seed",
    "load_ground_truth",
    "load_points",
    "load_suite",
    "nmi",
    "nmse",
    "run_eca",
    "save_points",
    "sse",
]
