"""Repeated seeded runs, best/worst/average aggregation, the five-feature
performance ranking and CSV/JSON report emission.

Per-run seeds derive from (master_seed, run_index) through the random
stream's spawn mechanism, so adding runs never perturbs earlier ones and runs
may execute concurrently without changing any result.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .baselines import KmConfig, kmeans
from .core import ClusteringResult, ConfigError, EcaConfig, run_eca
from .dataset import Dataset, DatasetMeta, GroundTruth, load_ground_truth, load_points
from .metrics import (
    MetricReport,
    centroid_index,
    csi,
    epsilon_ratio,
    mean_inter_cluster,
    mean_intra_cluster,
    nmi,
    nmse,
    sse,
)
from .stats import RandomStream

__all__ = [
    "ALGORITHMS",
    "ExperimentSpec",
    "QuantityStats",
    "RunStatistics",
    "RankingTable",
    "aggregate_quantity",
    "evaluate_result",
    "execute_runs",
    "run_experiment",
    "rank_algorithms",
    "emit_report",
    "REPORT_COLUMNS",
]

ALGORITHMS = ("eca_star", "kmeans", "kmeanspp")

REPORT_COLUMNS = (
    "dataset",
    "algorithm",
    "run",
    "sse",
    "nmse",
    "epsilon_ratio",
    "ci",
    "csi",
    "nmi",
    "avg_intra",
    "avg_inter",
    "wall_seconds",
)


@dataclass
class ExperimentSpec:
    """One experiment: an algorithm run repeatedly on one dataset."""

    algorithm: str
    data_path: str | Path
    truth_path: str | Path | None = None
    label_path: str | Path | None = None
    runs: int = 30
    master_seed: int = 0
    eca_config: EcaConfig | None = None
    km_config: KmConfig | None = None
    sse_opt: float = 0.001
    output_dir: str | Path | None = None
    jobs: int = 1
    record_timing: bool = True

    def validate(self) -> "ExperimentSpec":
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")
        if self.label_path is not None and self.truth_path is None:
            raise ConfigError("ground-truth labels need the accompanying centroid file (truth_path)")
        for path in (self.data_path, self.truth_path, self.label_path):
            if path is not None and not Path(path).is_file():
                raise FileNotFoundError(f"referenced file does not exist: {path}")
        return self


@dataclass(frozen=True)
class QuantityStats:
    """Best/worst/average of one quantity over the runs of an experiment."""

    best: float
    worst: float
    average: float


def aggregate_quantity(values, larger_is_better: bool = False) -> QuantityStats:
    """Fold per-run values into (best, worst, average)."""
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        raise ValueError("cannot aggregate zero values")
    lo, hi = float(arr.min()), float(arr.max())
    best, worst = (hi, lo) if larger_is_better else (lo, hi)
    return QuantityStats(best=best, worst=worst, average=float(arr.mean()))


@dataclass
class RunStatistics:
    """Aggregate view of repeated runs plus the per-run metric reports.

    ``intra`` and ``wall`` treat smaller as better; ``inter`` treats larger
    as better.  ``reports[i]`` is None when run ``i`` failed; the message is
    kept in ``errors``.
    """

    algorithm: str
    dataset: str
    runs: int
    intra: QuantityStats
    inter: QuantityStats
    wall: QuantityStats
    reports: list[Optional[MetricReport]] = field(default_factory=list)
    errors: list[tuple[int, str]] = field(default_factory=list)


@dataclass
class RankingTable:
    """Per-feature and overall average ranks (1 = best) of the algorithms."""

    algorithms: tuple[str, ...]
    dataset_ranks: dict[str, dict[str, float]]
    feature_ranks: dict[str, dict[str, float]]
    overall: dict[str, float]


def evaluate_result(
    result: ClusteringResult,
    dataset: Dataset,
    truth: GroundTruth | None = None,
    sse_opt: float = 0.001,
    record_timing: bool = True,
) -> MetricReport:
    """Score a finished clustering run; external measures need ground truth."""
    sse_val = sse(dataset.points, result.centroids)
    ci_val = None
    csi_val = None
    nmi_val = None
    if truth is not None:
        ci_val = centroid_index(result.centroids, truth.centroids)
        if truth.labels is not None:
            csi_val = csi(
                result.labels,
                truth.labels,
                solution_centroids=result.centroids,
                truth_centroids=truth.centroids,
            )
            nmi_val = nmi(result.labels, truth.labels)
    return MetricReport(
        sse=sse_val,
        nmse=nmse(sse_val, dataset.n, dataset.d),
        epsilon_ratio=epsilon_ratio(sse_val, sse_opt),
        avg_intra=mean_intra_cluster(dataset.points, result.labels),
        avg_inter=mean_inter_cluster(dataset.points, result.labels),
        ci=ci_val,
        csi=csi_val,
        nmi=nmi_val,
        wall_seconds=result.wall_seconds if record_timing else 0.0,
    )


def _dispatch(
    algorithm: str,
    dataset: Dataset,
    truth: GroundTruth | None,
    eca_config: EcaConfig | None,
    km_config: KmConfig | None,
    stream: RandomStream,
) -> ClusteringResult:
    if algorithm == "eca_star":
        return run_eca(dataset, eca_config or EcaConfig(), seed=stream)
    if km_config is not None:
        config = KmConfig(
            k=km_config.k, max_iter=km_config.max_iter, init=km_config.init, tolerance=km_config.tolerance
        )
    else:
        if truth is None:
            raise ConfigError(f"{algorithm} needs k: provide ground truth or a KmConfig")
        config = KmConfig(k=truth.k)
    config.init = "kmeanspp" if algorithm == "kmeanspp" else "random_points"
    return kmeans(dataset, config, seed=stream)


def execute_runs(
    algorithm: str,
    dataset: Dataset,
    truth: GroundTruth | None = None,
    runs: int = 30,
    master_seed: int = 0,
    eca_config: EcaConfig | None = None,
    km_config: KmConfig | None = None,
    sse_opt: float = 0.001,
    jobs: int = 1,
    record_timing: bool = True,
) -> RunStatistics:
    """Execute ``runs`` independent seeded runs and aggregate their statistics.

    Run ``i`` draws from the stream spawned at (master_seed, i).  A failing
    run records an error entry without aborting the remaining runs.
    """
    master = RandomStream(master_seed)

    def one(index: int) -> MetricReport:
        result = _dispatch(algorithm, dataset, truth, eca_config, km_config, master.substream(index))
        return evaluate_result(result, dataset, truth, sse_opt=sse_opt, record_timing=record_timing)

    reports: list[Optional[MetricReport]] = [None] * runs
    errors: list[tuple[int, str]] = []
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = {i: pool.submit(one, i) for i in range(runs)}
        for i in range(runs):
            try:
                reports[i] = futures[i].result()
            except Exception as exc:
                errors.append((i, f"{type(exc).__name__}: {exc}"))
    else:
        for i in range(runs):
            try:
                reports[i] = one(i)
            except Exception as exc:
                errors.append((i, f"{type(exc).__name__}: {exc}"))

    good = [r for r in reports if r is not None]
    if not good:
        details = "; ".join(msg for _, msg in errors)
        raise RuntimeError(f"all {runs} runs failed: {details}")
    return RunStatistics(
        algorithm=algorithm,
        dataset=dataset.name,
        runs=runs,
        intra=aggregate_quantity(r.avg_intra for r in good),
        inter=aggregate_quantity((r.avg_inter for r in good), larger_is_better=True),
        wall=aggregate_quantity(r.wall_seconds for r in good),
        reports=reports,
        errors=errors,
    )


def run_experiment(spec: ExperimentSpec) -> RunStatistics:
    """Load the spec's dataset and ground truth, then run the experiment."""
    spec.validate()
    try:
        dataset = load_points(spec.data_path)
    except Exception as exc:
        raise RuntimeError(f"failed to load dataset {spec.data_path}: {exc}") from exc
    truth = None
    if spec.truth_path is not None:
        try:
            truth = load_ground_truth(spec.truth_path, spec.label_path, dataset=dataset)
        except Exception as exc:
            raise RuntimeError(f"failed to load ground truth {spec.truth_path}: {exc}") from exc
    return execute_runs(
        spec.algorithm,
        dataset,
        truth,
        runs=spec.runs,
        master_seed=spec.master_seed,
        eca_config=spec.eca_config,
        km_config=spec.km_config,
        sse_opt=spec.sse_opt,
        jobs=spec.jobs,
        record_timing=spec.record_timing,
    )


def _mean_or(values: list, default: float) -> float:
    vals = [v for v in values if v is not None]
    return float(np.mean(vals)) if vals else default


def _average_ranks(keys: list[tuple]) -> list[float]:
    """Competition ranks 1..M with average rank on exact key ties."""
    order = sorted(range(len(keys)), key=lambda i: keys[i])
    ranks = [0.0] * len(keys)
    pos = 0
    while pos < len(order):
        end = pos
        while end + 1 < len(order) and keys[order[end + 1]] == keys[order[pos]]:
            end += 1
        avg = (pos + end) / 2.0 + 1.0
        for p in range(pos, end + 1):
            ranks[order[p]] = avg
        pos = end + 1
    return ranks


def rank_algorithms(
    stats: dict[tuple[str, str], RunStatistics],
    meta: dict[str, DatasetMeta],
) -> RankingTable:
    """Rank algorithms per dataset, average per feature tag, then overall.

    The per-dataset key is (average centroid index, average SSE, average wall
    seconds), each ascending; missing centroid indices sort last.  Feature
    ranks average the per-dataset ranks over the datasets carrying the tag;
    the overall rank averages the feature ranks.
    """
    algorithms = tuple(sorted({alg for alg, _ in stats}))
    datasets = tuple(sorted(meta))
    missing = [
        (alg, ds) for alg in algorithms for ds in datasets if (alg, ds) not in stats
    ]
    if missing:
        raise ConfigError(f"incomplete experiment grid; missing cells: {missing}")

    dataset_ranks: dict[str, dict[str, float]] = {}
    for ds in datasets:
        keys = []
        for alg in algorithms:
            cell = stats[(alg, ds)]
            good = [r for r in cell.reports if r is not None]
            avg_ci = _mean_or([r.ci for r in good], float("inf"))
            avg_sse = _mean_or([r.sse for r in good], float("inf"))
            avg_wall = _mean_or([r.wall_seconds for r in good], float("inf"))
            keys.append((avg_ci, avg_sse, avg_wall))
        ranks = _average_ranks(keys)
        dataset_ranks[ds] = {alg: ranks[i] for i, alg in enumerate(algorithms)}

    feature_ranks: dict[str, dict[str, float]] = {}
    tags = sorted({tag for m in meta.values() for tag in m.tags})
    for tag in tags:
        tagged = [ds for ds in datasets if tag in meta[ds].tags]
        feature_ranks[tag] = {
            alg: float(np.mean([dataset_ranks[ds][alg] for ds in tagged])) for alg in algorithms
        }
    overall = {
        alg: float(np.mean([feature_ranks[tag][alg] for tag in tags])) for alg in algorithms
    }
    return RankingTable(
        algorithms=algorithms,
        dataset_ranks=dataset_ranks,
        feature_ranks=feature_ranks,
        overall=overall,
    )


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _stat_rows(stats_list: Iterable[RunStatistics]) -> list[dict]:
    rows = []
    for stats in stats_list:
        failed = dict(stats.errors)
        for i, report in enumerate(stats.reports):
            row = {"dataset": stats.dataset, "algorithm": stats.algorithm, "run": i}
            if report is None:
                row.update({c: None for c in REPORT_COLUMNS[3:]})
                row["error"] = failed.get(i, "failed")
            else:
                row.update(report.as_dict())
            rows.append(row)
    return rows


def emit_report(obj, fmt: str, path) -> Path:
    """Write a RunStatistics (or list of them) or a RankingTable to disk.

    CSV columns are fixed and documented; JSON mirrors the same fields in the
    same order.  Floats are printed with 12 significant digits so that parsed
    values round-trip within 1e-9 relative error.  Emission is pure: the same
    input always produces byte-identical files.
    """
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown report format {fmt!r}; use 'csv' or 'json'")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    if isinstance(obj, RankingTable):
        rows = []
        for ds in sorted(obj.dataset_ranks):
            for alg in obj.algorithms:
                rows.append({"scope": "dataset", "name": ds, "algorithm": alg, "rank": obj.dataset_ranks[ds][alg]})
        for tag in sorted(obj.feature_ranks):
            for alg in obj.algorithms:
                rows.append({"scope": "feature", "name": tag, "algorithm": alg, "rank": obj.feature_ranks[tag][alg]})
        for alg in obj.algorithms:
            rows.append({"scope": "overall", "name": "overall", "algorithm": alg, "rank": obj.overall[alg]})
        if fmt == "csv":
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(("scope", "name", "algorithm", "rank"))
                for row in rows:
                    writer.writerow((row["scope"], row["name"], row["algorithm"], _fmt(row["rank"])))
        else:
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(rows, fh, indent=2)
                fh.write("\n")
        return path

    stats_list = [obj] if isinstance(obj, RunStatistics) else list(obj)
    rows = _stat_rows(stats_list)
    if fmt == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(REPORT_COLUMNS)
            for row in rows:
                writer.writerow(tuple(_fmt(row.get(col)) for col in REPORT_COLUMNS))
    else:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2)
            fh.write("\n")
    return path
