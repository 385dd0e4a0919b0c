"""Command-line interface: seeded experiment runs, benchmark grids with
ranking, external-partition scoring and synthetic data generation.

All randomness flows from ``--seed``.  Exit code 0 on success, nonzero on any
error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .baselines import KmConfig
from .core import EcaConfig
from .dataset import (
    generate_blobs,
    load_ground_truth,
    load_labels,
    load_points,
    load_suite,
    save_points,
)
from .harness import ExperimentSpec, emit_report, rank_algorithms, run_experiment
from .metrics import (
    MetricReport,
    centroid_index,
    csi,
    epsilon_ratio,
    mean_inter_cluster,
    mean_intra_cluster,
    nmi,
    nmse,
    relabel,
    sse,
)

_ALGO_ALIASES = {"eca": "eca_star", "eca_star": "eca_star", "kmeans": "kmeans", "kmeanspp": "kmeanspp"}


def _parse_kv_file(path: Path) -> dict[str, str]:
    """Flat key-value config: one ``key = value`` per line, '#' comments."""
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {stripped!r}")
            key, value = stripped.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def _coerce(value: str, target_type):
    if target_type is int:
        return int(value)
    if target_type is float:
        return float(value)
    return value


def _configs_from_kv(pairs: dict[str, str]) -> tuple[EcaConfig, KmConfig | None]:
    """Split flat key-value pairs into the two algorithm configs by field name."""
    eca_defaults = {f.name: f.default for f in dataclasses.fields(EcaConfig)}
    km_defaults = {f.name: f.default for f in dataclasses.fields(KmConfig)}
    eca_kwargs: dict = {}
    km_kwargs: dict = {}
    for key, raw in pairs.items():
        if key in eca_defaults:
            eca_kwargs[key] = _coerce(raw, type(eca_defaults[key]))
        elif key in km_defaults:
            km_kwargs[key] = _coerce(raw, type(km_defaults[key]))
        else:
            raise ValueError(f"unknown config key {key!r}")
    eca = EcaConfig(**eca_kwargs)
    km = KmConfig(**km_kwargs) if km_kwargs else None
    return eca, km


def _cmd_run(args) -> int:
    algorithm = _ALGO_ALIASES[args.algo]
    eca_config, km_config = (EcaConfig(), None)
    if args.config:
        eca_config, km_config = _configs_from_kv(_parse_kv_file(Path(args.config)))
    spec = ExperimentSpec(
        algorithm=algorithm,
        data_path=args.data,
        truth_path=args.truth,
        label_path=args.labels,
        runs=args.runs,
        master_seed=args.seed,
        eca_config=eca_config,
        km_config=km_config,
        output_dir=args.out,
        jobs=args.jobs,
        record_timing=not args.no_timing,
        sse_opt=args.sse_opt,
    )
    stats = run_experiment(spec)
    out = Path(args.out)
    stem = f"{stats.dataset}_{algorithm}"
    emit_report(stats, "csv", out / f"{stem}_runs.csv")
    emit_report(stats, "json", out / f"{stem}_runs.json")
    summary = {
        "dataset": stats.dataset,
        "algorithm": stats.algorithm,
        "runs": stats.runs,
        "failed_runs": len(stats.errors),
        "intra": dataclasses.asdict(stats.intra),
        "inter": dataclasses.asdict(stats.inter),
        "wall_seconds": dataclasses.asdict(stats.wall),
    }
    summary_path = out / f"{stem}_summary.json"
    summary_path.parent.mkdir(parents=True, exist_ok=True)
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    print(f"wrote {out / (stem + '_runs.csv')}")
    print(f"wrote {out / (stem + '_runs.json')}")
    print(f"wrote {summary_path}")
    return 0


def _cmd_bench(args) -> int:
    suite = load_suite(Path(args.suite))
    algorithms = [_ALGO_ALIASES[a.strip()] for a in args.algos.split(",") if a.strip()]
    if not algorithms:
        raise ValueError("--algos must name at least one algorithm")
    base_eca, base_km = (EcaConfig(), None)
    if args.config:
        base_eca, base_km = _configs_from_kv(_parse_kv_file(Path(args.config)))

    stats_grid = {}
    meta = {}
    all_stats = []
    for name, entry in suite.items():
        eca_config = dataclasses.replace(
            base_eca, social_ranks=entry.social_ranks or base_eca.social_ranks
        )
        for algorithm in algorithms:
            spec = ExperimentSpec(
                algorithm=algorithm,
                data_path=entry.data_path,
                truth_path=entry.truth_path,
                label_path=entry.label_path,
                runs=args.runs,
                master_seed=args.seed,
                eca_config=eca_config,
                km_config=base_km,
                jobs=args.jobs,
                record_timing=not args.no_timing,
                sse_opt=args.sse_opt,
            )
            stats = run_experiment(spec)
            stats.dataset = name
            stats_grid[(algorithm, name)] = stats
            all_stats.append(stats)
        meta[name] = entry.meta

    out = Path(args.out)
    emit_report(all_stats, "csv", out / "runs.csv")
    emit_report(all_stats, "json", out / "runs.json")
    ranking = rank_algorithms(stats_grid, meta)
    emit_report(ranking, "csv", out / "ranking.csv")
    emit_report(ranking, "json", out / "ranking.json")
    print(f"wrote {out / 'runs.csv'} and {out / 'runs.json'}")
    print(f"wrote {out / 'ranking.csv'} and {out / 'ranking.json'}")
    return 0


def _cmd_metrics(args) -> int:
    dataset = load_points(args.data)
    labels = relabel(load_labels(args.labels, n=dataset.n))
    truth = load_ground_truth(args.truth, args.truth_labels, dataset=dataset)
    # The scored partition provides no centroids; use per-cluster means.
    centroids = np.vstack(
        [dataset.points[labels == cid].mean(axis=0) for cid in np.unique(labels)]
    )
    sse_val = sse(dataset.points, centroids)
    report = MetricReport(
        sse=sse_val,
        nmse=nmse(sse_val, dataset.n, dataset.d),
        epsilon_ratio=epsilon_ratio(sse_val, args.sse_opt),
        avg_intra=mean_intra_cluster(dataset.points, labels),
        avg_inter=mean_inter_cluster(dataset.points, labels),
        ci=centroid_index(centroids, truth.centroids),
        csi=csi(labels, truth.labels, solution_centroids=centroids, truth_centroids=truth.centroids)
        if truth.labels is not None
        else None,
        nmi=nmi(labels, truth.labels) if truth.labels is not None else None,
        wall_seconds=0.0,
    )
    print(json.dumps(report.as_dict(), indent=2))
    return 0


def _cmd_gen_blobs(args) -> int:
    data, truth = generate_blobs(
        k=args.k,
        per_cluster=args.per,
        d=args.dim,
        spread=args.spread,
        separation=args.sep,
        seed=args.seed,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_points(data, out / "points.txt")
    np.savetxt(out / "centroids.txt", truth.centroids, fmt="%.17g")
    np.savetxt(out / "labels.txt", truth.labels, fmt="%d")
    print(f"wrote {out / 'points.txt'} ({data.n} points, {data.d} dims)")
    print(f"wrote {out / 'centroids.txt'} ({truth.k} centroids)")
    print(f"wrote {out / 'labels.txt'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ecastar", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one algorithm on one dataset N times")
    run_p.add_argument("--algo", required=True, choices=sorted(_ALGO_ALIASES))
    run_p.add_argument("--data", required=True)
    run_p.add_argument("--truth", default=None)
    run_p.add_argument("--labels", default=None)
    run_p.add_argument("--runs", type=int, default=30)
    run_p.add_argument("--seed", type=int, default=0)
    run_p.add_argument("--config", default=None, help="flat key=value config file")
    run_p.add_argument("--out", required=True)
    run_p.add_argument("--jobs", type=int, default=1)
    run_p.add_argument("--sse-opt", type=float, default=0.001)
    run_p.add_argument("--no-timing", action="store_true", help="report wall_seconds as 0 for byte-reproducible output")
    run_p.set_defaults(func=_cmd_run)

    bench_p = sub.add_parser("bench", help="full algorithm x dataset grid with ranking")
    bench_p.add_argument("--suite", required=True, help="INI metadata file, one section per dataset")
    bench_p.add_argument("--algos", required=True, help="comma list from: eca,kmeans,kmeanspp")
    bench_p.add_argument("--runs", type=int, default=30)
    bench_p.add_argument("--seed", type=int, default=0)
    bench_p.add_argument("--config", default=None)
    bench_p.add_argument("--out", required=True)
    bench_p.add_argument("--jobs", type=int, default=1)
    bench_p.add_argument("--sse-opt", type=float, default=0.001)
    bench_p.add_argument("--no-timing", action="store_true")
    bench_p.set_defaults(func=_cmd_bench)

    metrics_p = sub.add_parser("metrics", help="score an external partition against ground truth")
    metrics_p.add_argument("--data", required=True)
    metrics_p.add_argument("--labels", required=True)
    metrics_p.add_argument("--truth", required=True)
    metrics_p.add_argument("--truth-labels", default=None)
    metrics_p.add_argument("--sse-opt", type=float, default=0.001)
    metrics_p.set_defaults(func=_cmd_metrics)

    gen_p = sub.add_parser("gen-blobs", help="generate a seeded synthetic dataset")
    gen_p.add_argument("--k", type=int, required=True)
    gen_p.add_argument("--per", type=int, required=True)
    gen_p.add_argument("--dim", type=int, required=True)
    gen_p.add_argument("--spread", type=float, required=True)
    gen_p.add_argument("--sep", type=float, required=True)
    gen_p.add_argument("--seed", type=int, required=True)
    gen_p.add_argument("--out", required=True)
    gen_p.set_defaults(func=_cmd_gen_blobs)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
