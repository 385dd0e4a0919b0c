"""Benchmark dataset loading, synthetic blob generation and per-dimension bounds.

The on-disk point format is the plain-text one used by the public clustering
benchmark suites: one point per line, whitespace-separated decimal tokens,
blank lines ignored.  Ground-truth centroid files share the format; partition
label files hold one integer per line and may be 0- or 1-based (1-based files
are detected and normalised).
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from ._validation import as_point_matrix
from .stats import RandomStream

__all__ = [
    "Dataset",
    "GroundTruth",
    "DatasetMeta",
    "DatasetFormatError",
    "SuiteEntry",
    "FEATURE_TAGS",
    "load_points",
    "save_points",
    "load_ground_truth",
    "load_labels",
    "load_suite",
    "generate_blobs",
    "bounds",
]

FEATURE_TAGS = frozenset({"overlap", "cluster_count", "dimensionality", "structure", "shape"})


class DatasetFormatError(ValueError):
    """Raised when an on-disk dataset file does not match the expected format."""


@dataclass(frozen=True)
class Dataset:
    """Immutable N x D table of finite real-valued points.

    The row order is preserved exactly as read and the underlying array is
    made read-only, so a Dataset is safe to share across concurrent runs.
    """

    points: np.ndarray
    name: str = "dataset"

    def __post_init__(self):
        pts = as_point_matrix(self.points, name="points").copy()
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @cached_property
    def bounds(self) -> np.ndarray:
        """Per-dimension (min, max) pairs as a read-only (d, 2) array."""
        b = np.stack([self.points.min(axis=0), self.points.max(axis=0)], axis=1)
        b.flags.writeable = False
        return b

    def __repr__(self) -> str:
        return f"Dataset(name={self.name!r}, n={self.n}, d={self.d})"


@dataclass(frozen=True)
class GroundTruth:
    """Reference centroids and, optionally, a reference partition."""

    centroids: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        cents = as_point_matrix(self.centroids, name="centroids").copy()
        cents.flags.writeable = False
        object.__setattr__(self, "centroids", cents)
        if self.labels is not None:
            labs = np.asarray(self.labels, dtype=np.int64).copy()
            if labs.ndim != 1:
                raise ValueError("labels must be one-dimensional")
            if labs.min() < 0 or labs.max() >= self.k:
                raise ValueError(
                    f"labels must reference centroid rows in [0, {self.k}), "
                    f"got range [{labs.min()}, {labs.max()}]"
                )
            labs.flags.writeable = False
            object.__setattr__(self, "labels", labs)

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    @property
    def d(self) -> int:
        return self.centroids.shape[1]


@dataclass(frozen=True)
class DatasetMeta:
    """Feature tags and declared sizes of a named benchmark dataset."""

    tags: frozenset[str]
    declared_clusters: int
    declared_n: int

    def __post_init__(self):
        tags = frozenset(self.tags)
        if not tags:
            raise ValueError("at least one feature tag is required")
        unknown = tags - FEATURE_TAGS
        if unknown:
            raise ValueError(f"unknown feature tags {sorted(unknown)}; allowed: {sorted(FEATURE_TAGS)}")
        object.__setattr__(self, "tags", tags)
        if self.declared_clusters < 1:
            raise ValueError("declared_clusters must be positive")
        if self.declared_n < 1:
            raise ValueError("declared_n must be positive")


def _parse_point_lines(path: Path) -> np.ndarray:
    rows: list[list[float]] = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            tokens = line.split()
            if not tokens:
                continue
            try:
                row = [float(tok) for tok in tokens]
            except ValueError as exc:
                raise DatasetFormatError(f"{path}:{lineno}: non-numeric token ({exc})") from None
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise DatasetFormatError(
                    f"{path}:{lineno}: expected {width} values per line, found {len(row)}"
                )
            rows.append(row)
    if not rows:
        raise DatasetFormatError(f"{path}: file contains no data points")
    return np.asarray(rows, dtype=float)


def load_points(path) -> Dataset:
    """Load a whitespace-separated point file; the name is the file stem."""
    path = Path(path)
    return Dataset(_parse_point_lines(path), name=path.stem)


def save_points(dataset: Dataset, path) -> None:
    """Write a Dataset back to the text format; values round-trip exactly."""
    np.savetxt(path, dataset.points, fmt="%.17g")


def load_labels(path, n: int | None = None) -> np.ndarray:
    """Load a partition label file (one integer per line), normalised to 0-based.

    A file is treated as 1-based when its minimum label is 1 and 0 never
    appears, which matches the convention of the public benchmark suites.
    """
    path = Path(path)
    labels: list[int] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            tok = line.strip()
            if not tok:
                continue
            try:
                labels.append(int(tok))
            except ValueError:
                raise DatasetFormatError(f"{path}:{lineno}: expected one integer per line, got {tok!r}") from None
    if not labels:
        raise DatasetFormatError(f"{path}: file contains no labels")
    arr = np.asarray(labels, dtype=np.int64)
    if n is not None and arr.shape[0] != n:
        raise DatasetFormatError(f"{path}: {arr.shape[0]} labels for {n} points")
    if arr.min() == 1 and not np.any(arr == 0):
        arr = arr - 1
    return arr


def load_ground_truth(centroid_path, label_path=None, dataset: Dataset | None = None) -> GroundTruth:
    """Load reference centroids and (optionally) reference partition labels.

    When ``dataset`` is given, the centroid dimensionality and label count are
    checked against it.
    """
    centroids = _parse_point_lines(Path(centroid_path))
    if dataset is not None and centroids.shape[1] != dataset.d:
        raise DatasetFormatError(
            f"{centroid_path}: centroid dimensionality {centroids.shape[1]} "
            f"does not match dataset dimensionality {dataset.d}"
        )
    labels = None
    if label_path is not None:
        labels = load_labels(label_path, n=dataset.n if dataset is not None else None)
        if labels.min() < 0 or labels.max() >= centroids.shape[0]:
            raise DatasetFormatError(
                f"{label_path}: labels outside [0, {centroids.shape[0]}) after normalisation"
            )
    return GroundTruth(centroids=centroids, labels=labels)


@dataclass(frozen=True)
class SuiteEntry:
    """One dataset in a benchmark suite: file locations plus metadata."""

    name: str
    data_path: Path
    truth_path: Path | None
    label_path: Path | None
    meta: DatasetMeta
    social_ranks: int | None = None


def load_suite(path) -> dict[str, SuiteEntry]:
    """Load a benchmark metadata sidecar: one INI section per dataset.

    Keys per section: ``data`` (required), ``truth``, ``labels``, ``tags``
    (comma list of feature tags), ``clusters``, ``n`` and an optional
    per-dataset ``social_ranks`` override.  Relative paths resolve against
    the suite file's directory; ``#``/``;`` start comments.
    """
    path = Path(path)
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = parser.read(path)
    if not read or not parser.sections():
        raise DatasetFormatError(f"suite file {path} has no dataset sections")
    base = path.parent
    suite: dict[str, SuiteEntry] = {}
    for section in parser.sections():
        entry = parser[section]
        if "data" not in entry:
            raise DatasetFormatError(f"suite section [{section}] is missing the 'data' key")
        data_path = base / entry["data"]
        tags = frozenset(t.strip() for t in entry.get("tags", "").split(",") if t.strip())
        declared_n = entry.getint("n") if "n" in entry else None
        if declared_n is None:
            declared_n = sum(1 for line in open(data_path, encoding="utf-8") if line.split())
        meta = DatasetMeta(
            tags=tags or frozenset({"structure"}),
            declared_clusters=entry.getint("clusters") if "clusters" in entry else 1,
            declared_n=declared_n,
        )
        suite[section] = SuiteEntry(
            name=section,
            data_path=data_path,
            truth_path=base / entry["truth"] if "truth" in entry else None,
            label_path=base / entry["labels"] if "labels" in entry else None,
            meta=meta,
            social_ranks=entry.getint("social_ranks") if "social_ranks" in entry else None,
        )
    return suite


def _place_centers(k: int, d: int, separation: float, rng: RandomStream, max_attempts: int = 1000) -> np.ndarray:
    side = separation * max(2.0, 2.0 * k ** (1.0 / d))
    centers: list[np.ndarray] = []
    for _ in range(max_attempts):
        candidate = np.asarray(rng.uniform(0.0, side, size=d), dtype=float)
        if all(np.linalg.norm(candidate - c) >= separation for c in centers):
            centers.append(candidate)
            if len(centers) == k:
                return np.vstack(centers)
    raise ValueError(
        f"could not place {k} centers at pairwise separation {separation} "
        f"within {max_attempts} attempts"
    )


def generate_blobs(
    k: int,
    per_cluster: int,
    d: int,
    spread: float,
    separation: float,
    seed: int,
    centers=None,
) -> tuple[Dataset, GroundTruth]:
    """Seeded isotropic Gaussian blobs with pairwise-separated centers.

    ``k`` clusters of ``per_cluster`` points each are drawn with standard
    deviation ``spread`` around centers at least ``separation`` apart.  The
    output is a pure function of the arguments including ``seed``.  Passing
    ``centers`` (a (k, d) array) skips random placement; explicit centers must
    still honour the separation.
    """
    if k < 1 or per_cluster < 1 or d < 1:
        raise ValueError("k, per_cluster and d must be positive")
    if k * per_cluster < 2:
        raise ValueError("k * per_cluster must be at least 2")
    if spread <= 0 or separation <= 0:
        raise ValueError("spread and separation must be positive")
    rng = RandomStream(seed)
    if centers is None:
        ctr = _place_centers(k, d, separation, rng)
    else:
        ctr = np.asarray(centers, dtype=float)
        if ctr.shape != (k, d):
            raise ValueError(f"centers must have shape ({k}, {d}), got {ctr.shape}")
        for i in range(k):
            for j in range(i + 1, k):
                if np.linalg.norm(ctr[i] - ctr[j]) < separation:
                    raise ValueError(f"centers {i} and {j} are closer than the requested separation")
    points = np.empty((k * per_cluster, d), dtype=float)
    labels = np.repeat(np.arange(k, dtype=np.int64), per_cluster)
    for i in range(k):
        noise = np.asarray(rng.normal(0.0, spread, size=(per_cluster, d)), dtype=float)
        points[i * per_cluster : (i + 1) * per_cluster] = ctr[i] + noise
    name = f"blobs_k{k}_d{d}_seed{seed}"
    return Dataset(points, name=name), GroundTruth(centroids=ctr, labels=labels)


def bounds(dataset) -> np.ndarray:
    """Exact column-wise (min, max) pairs of a Dataset or raw point matrix."""
    if isinstance(dataset, Dataset):
        return dataset.bounds
    pts = as_point_matrix(dataset, name="dataset")
    return np.stack([pts.min(axis=0), pts.max(axis=0)], axis=1)
