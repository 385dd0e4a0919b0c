"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines; a pytest failure on any test means the criterion did not hold.
"""

import math
import os
import time
from pathlib import Path

import numpy as np
import pytest

from ecastar.baselines import KmConfig, kmeans
from ecastar.core import (
    EcaConfig,
    apply_centroids,
    compute_conditional,
    crossover,
    fitness,
    initialize,
    merge_clusters,
    mut_over,
    mutate,
    run_eca,
    sample_historical,
    select_elite,
)
from ecastar.dataset import Dataset, DatasetMeta, generate_blobs, load_ground_truth, load_points
from ecastar.harness import (
    QuantityStats,
    RunStatistics,
    emit_report,
    execute_runs,
    rank_algorithms,
)
from ecastar.metrics import (
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
from ecastar.stats import LevyParams, RandomStream, levy_step

from test_metrics import (
    brute_ci,
    brute_csi,
    brute_inter,
    brute_intra,
    brute_nmi,
    brute_sse,
)

QUAD_CENTERS = np.array([[0.0, 0.0], [50.0, 0.0], [0.0, 50.0], [50.0, 50.0]])


def _passed(number: int, name: str) -> None:
    print(f"ACCEPTANCE {number:02d} {name}: PASS")


def test_c01_metric_oracle_equivalence():
    """Every metric matches an independent brute-force implementation to
    1e-12 relative tolerance on 200 random small instances, in under 10 s."""
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    for _ in range(200):
        n = int(rng.integers(2, 9))
        d = int(rng.integers(1, 4))
        k = int(rng.integers(1, min(3, n) + 1))
        pts = rng.normal(size=(n, d)) * 10
        cents = rng.normal(size=(k, d)) * 10
        labels = rng.integers(0, k, size=n)
        labels[:k] = np.arange(k)
        other = rng.integers(0, k, size=n)
        other[:k] = np.arange(k)
        truth_cents = rng.normal(size=(k, d)) * 10

        for cid in range(k):
            block = pts[labels == cid]
            assert intra_cluster(block) == pytest.approx(brute_intra(block), rel=1e-12, abs=1e-15)
        if k >= 2:
            a, b = pts[labels == 0], pts[labels == 1]
            assert inter_cluster(a, b) == pytest.approx(brute_inter(a, b), rel=1e-12)
        sse_val = sse(pts, cents)
        assert sse_val == pytest.approx(brute_sse(pts, cents), rel=1e-12)
        assert nmse(sse_val, n, d) == pytest.approx(brute_sse(pts, cents) / (n * d), rel=1e-12)
        assert epsilon_ratio(sse_val) == pytest.approx((brute_sse(pts, cents) - 0.001) / 0.001, rel=1e-12)
        assert centroid_index(cents, truth_cents) == brute_ci(cents, truth_cents)
        assert csi(labels, other, cents, truth_cents) == pytest.approx(
            brute_csi(labels.tolist(), other.tolist(), cents, truth_cents), rel=1e-12
        )
        assert nmi(labels, other) == pytest.approx(
            brute_nmi(labels.tolist(), other.tolist()), rel=1e-12, abs=1e-12
        )
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"oracle sweep took {elapsed:.1f}s"
    _passed(1, "metric oracle equivalence")


def test_c02_recovery_on_separable_blobs():
    """With two percentile bands per dimension and defaults otherwise, the
    algorithm recovers four well-separated blobs (CI = 0) in at least 27 of
    30 seeded runs, within 30 s total.

    Three seeded instances (separations 10x, 20x and 50x the spread, centers
    on a quadrant layout so the rank bands can isolate four clusters at all)
    each get ten algorithm seeds."""
    start = time.perf_counter()
    hits = 0
    total = 0
    for instance_seed, separation in ((7, 10.0), (8, 20.0), (9, 50.0)):
        centers = QUAD_CENTERS / 50.0 * separation
        data, truth = generate_blobs(
            k=4, per_cluster=200, d=2, spread=1.0, separation=separation,
            seed=instance_seed, centers=centers,
        )
        assert data.n == 800
        for seed in range(10):
            result = run_eca(data, EcaConfig(social_ranks=2), seed=seed)
            if centroid_index(result.centroids, truth.centroids) == 0:
                hits += 1
            total += 1
    elapsed = time.perf_counter() - start
    assert total == 30
    assert hits >= 27, f"CI=0 in only {hits}/30 runs"
    assert elapsed < 30.0, f"recovery runs took {elapsed:.1f}s"
    _passed(2, f"separable-blob recovery ({hits}/30 runs, {elapsed:.1f}s)")


def _bench_dir() -> Path | None:
    env = os.environ.get("ECASTAR_BENCH_DIR")
    candidates = [Path(env)] if env else []
    candidates.append(Path(__file__).resolve().parent.parent / "benchmarks")
    for cand in candidates:
        if cand.is_dir():
            return cand
    return None


@pytest.mark.parametrize("name,clusters", [("s1", 15), ("a1", 20), ("unbalance", 8)])
def test_c03_public_benchmark_sanity(name, clusters):
    """On the public benchmark files (when present locally), CI <= 1 in at
    least 24 of 30 runs.  Skipped unless <repo>/benchmarks or
    $ECASTAR_BENCH_DIR holds <name>.txt and <name>-centroids.txt."""
    bench = _bench_dir()
    if bench is None or not (bench / f"{name}.txt").is_file():
        pytest.skip(
            f"benchmark files not provided; place {name}.txt and {name}-centroids.txt "
            "under ./benchmarks or $ECASTAR_BENCH_DIR"
        )
    start = time.perf_counter()
    data = load_points(bench / f"{name}.txt")
    truth = load_ground_truth(bench / f"{name}-centroids.txt", dataset=data)
    social_ranks = max(2, math.ceil(math.sqrt(truth.k)))
    config = EcaConfig(social_ranks=social_ranks)
    hits = 0
    for seed in range(30):
        result = run_eca(data, config, seed=seed)
        if centroid_index(result.centroids, truth.centroids) <= 1:
            hits += 1
    elapsed = time.perf_counter() - start
    assert hits >= 24, f"{name}: CI<=1 in only {hits}/30 runs"
    assert elapsed < 600.0, f"{name} took {elapsed:.0f}s"
    _passed(3, f"benchmark sanity on {name} ({hits}/30)")


def test_c04_determinism_across_invocations_and_threads(tmp_path):
    """The same (algorithm, dataset, config, seed) tuple reproduces
    byte-identical reports across invocations (including separate
    processes) and thread counts; timing is suppressed since wall time is
    physical."""
    import subprocess
    import sys

    from ecastar.dataset import save_points

    data, truth = generate_blobs(k=3, per_cluster=30, d=2, spread=0.6, separation=12.0, seed=11)
    paths = []
    for tag, jobs in (("a", 1), ("b", 1), ("threads", 4)):
        stats = execute_runs(
            "eca_star", data, truth, runs=6, master_seed=21, jobs=jobs, record_timing=False
        )
        paths.append(emit_report(stats, "csv", tmp_path / f"{tag}.csv"))
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert paths[0].read_bytes() == paths[2].read_bytes()

    # Fresh-process invocations of the CLI agree byte for byte.
    data_path = tmp_path / "pts.txt"
    truth_path = tmp_path / "cents.txt"
    save_points(data, data_path)
    np.savetxt(truth_path, truth.centroids, fmt="%.17g")
    outputs = []
    for tag in ("p1", "p2"):
        out_dir = tmp_path / tag
        proc = subprocess.run(
            [
                sys.executable, "-m", "ecastar.cli", "run", "--algo", "eca",
                "--data", str(data_path), "--truth", str(truth_path),
                "--runs", "3", "--seed", "21", "--no-timing", "--out", str(out_dir),
            ],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        outputs.append((out_dir / "pts_eca_star_runs.csv").read_bytes())
    assert outputs[0] == outputs[1]

    # Algorithm-level determinism, including timing-independent fields.
    r1 = run_eca(data, EcaConfig(), seed=33)
    r2 = run_eca(data, EcaConfig(), seed=33)
    assert np.array_equal(r1.labels, r2.labels)
    assert np.array_equal(r1.centroids, r2.centroids)
    assert r1.intra_trace == r2.intra_trace
    _passed(4, "determinism across processes and thread counts")


def test_c05_operator_invariants_randomized():
    """1000 randomized operator cycles: cluster count never increases, all
    trial centroids stay within data bounds, elite selection picks the
    conditional-intra minimiser (historical on ties) and crossover output is
    componentwise one of its parents.  Zero violations allowed."""
    rng_data = np.random.default_rng(202)
    cycles_done = 0
    instance = 0
    while cycles_done < 1000:
        instance += 1
        n = int(rng_data.integers(10, 50))
        d = int(rng_data.integers(1, 4))
        if rng_data.random() < 0.5:
            pts = rng_data.normal(size=(n, d)) * rng_data.uniform(0.5, 20)
        else:
            k_blobs = int(rng_data.integers(2, 5))
            centers = rng_data.normal(size=(k_blobs, d)) * 20
            pts = np.vstack([
                centers[i] + rng_data.normal(size=(max(2, n // k_blobs), d))
                for i in range(k_blobs)
            ])
        ds = Dataset(pts)
        config = EcaConfig(social_ranks=int(rng_data.integers(2, 4)))
        stream = RandomStream(instance)
        state = initialize(ds, config)
        lo, hi = ds.bounds[:, 0], ds.bounds[:, 1]
        for _ in range(20):
            k_before = state.k
            state.old_centroids = sample_historical(state, ds, stream)
            current = state.centroids.copy()
            old = state.old_centroids.copy()
            cond = compute_conditional(state, ds)
            elite = select_elite(state, ds)
            for r in range(k_before):
                if cond.intra_current[r] < cond.intra_old[r]:
                    assert np.array_equal(elite[r], current[r]), "elite must keep the better current centroid"
                    assert cond.intra_current[r] <= cond.intra_old[r]
                else:
                    assert np.array_equal(elite[r], old[r]), "elite must fall back to the historical centroid"
            mutant = mutate(state, ds, config, stream)
            crossed = crossover(state, config, stream)
            from_parents = (crossed == current) | (crossed == old)
            assert from_parents.all(), "crossover component not drawn from its parents"
            trial = mut_over(state, ds, mutant, crossed, stream)
            assert np.all(trial >= lo - 1e-12) and np.all(trial <= hi + 1e-12), "trial centroid out of bounds"
            apply_centroids(state, ds, trial)
            merge_clusters(state, ds, config)
            assert state.k <= k_before, "cluster count increased"
            assert np.isin(state.assignments, state.ids).all(), "assignment references a dead cluster"
            assert all(np.any(state.assignments == cid) for cid in state.ids), "live cluster left empty"
            assert np.all(state.centroids >= lo - 1e-12) and np.all(state.centroids <= hi + 1e-12)
            avg_intra, avg_inter, _ = fitness(state, ds, config.convergence_tolerance)
            state.prev_intra, state.prev_inter = avg_intra, avg_inter
            cycles_done += 1
            if cycles_done >= 1000:
                break
    _passed(5, f"operator invariants over {cycles_done} randomized cycles")


def test_c06_levy_tail():
    """100k uncapped draws at the default stability exponent put at least 1%
    of the mass above 10x the median absolute step."""
    params = LevyParams(alpha=1.001, scale=1.0, cap=math.inf)
    draws = np.abs(levy_step(params, RandomStream(303), size=100_000))
    median = float(np.median(draws))
    frac = float(np.mean(draws > 10.0 * median))
    assert frac >= 0.01, f"only {frac:.4f} of draws exceed 10x median"
    _passed(6, f"heavy tail ({frac:.3f} of draws beyond 10x median)")


def test_c07_baseline_contract():
    """Lloyd SSE is non-increasing on 100 random instances, and k-means++
    seeding beats random seeding on average over 30 seeds (5% slack)."""
    rng = np.random.default_rng(404)
    for trial in range(100):
        n = int(rng.integers(8, 50))
        d = int(rng.integers(1, 4))
        ds = Dataset(rng.normal(size=(n, d)) * rng.uniform(1, 10))
        k = int(rng.integers(1, min(6, n) + 1))
        init = "kmeanspp" if trial % 2 else "random_points"
        result = kmeans(ds, KmConfig(k=k, init=init), seed=trial)
        trace = result.sse_trace
        assert all(a >= b - 1e-9 * max(1.0, a) for a, b in zip(trace, trace[1:])), (
            f"SSE increased on trial {trial}: {trace}"
        )

    data, _ = generate_blobs(
        k=4, per_cluster=200, d=2, spread=1.0, separation=50.0, seed=7, centers=QUAD_CENTERS
    )
    pp, rand = [], []
    for seed in range(30):
        pp.append(kmeans(data, KmConfig(k=4, init="kmeanspp"), seed=seed).sse_trace[-1])
        rand.append(kmeans(data, KmConfig(k=4, init="random_points"), seed=seed).sse_trace[-1])
    assert np.mean(pp) <= np.mean(rand) * 1.05, (
        f"kmeans++ mean SSE {np.mean(pp):.1f} vs random {np.mean(rand):.1f}"
    )
    _passed(7, "baseline contract (monotone SSE, seeding advantage)")


# Hand-built two-cluster configurations: members_a, members_b, expected sigma,
# expected merge.  sigma = min(d_min - R(a), d_min - R(b)) with R the average
# pairwise distance and d_min the closest cross pair.
MERGE_CASES = [
    ([[0.0], [1.0]], [[1.5], [2.5]], -0.5, True),
    ([[0.0]], [[5.0]], 5.0, False),
    ([[0.0], [2.0]], [[3.0], [5.0]], -1.0, True),
    ([[0.0], [0.1]], [[10.0], [10.1]], 9.8, False),
    ([[0.0], [4.0]], [[5.0], [6.0]], -3.0, True),
    ([[0.0], [1.0]], [[2.0], [3.0]], 0.0, True),  # boundary: merge at sigma == 0
    ([[0.0], [1.0]], [[2.001], [3.001]], 0.001, False),
    ([[0.0, 0.0], [0.0, 2.0]], [[3.0, 0.0], [3.0, 2.0]], 1.0, False),
    ([[0.0, 0.0], [0.0, 2.0]], [[1.0, 1.0], [1.0, 3.0]], math.sqrt(2) - 2.0, True),
    ([[5.0]], [[0.0], [8.0]], -5.0, True),  # singleton vs straddling cluster
]


def test_c08_merge_rule_hand_table():
    """The diversity-merge decision matches hand substitutions on a fixed
    table of two-cluster configurations."""
    for case_no, (a, b, sigma_expected, should_merge) in enumerate(MERGE_CASES):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        d_min = min(math.dist(x, y) for x in a for y in b)
        sigma = min(d_min - brute_intra(a), d_min - brute_intra(b))
        assert sigma == pytest.approx(sigma_expected, abs=1e-12), f"case {case_no}: bad table value"

        pts = np.vstack([a, b])
        labels = np.array([0] * len(a) + [1] * len(b))
        ds = Dataset(pts)
        ids = np.unique(labels)
        cents = np.vstack([pts[labels == cid].mean(axis=0) for cid in ids])
        from ecastar.core import EcaState

        state = EcaState(
            assignments=labels.copy(), ids=ids, centroids=cents, old_centroids=cents.copy()
        )
        merge_clusters(state, ds, EcaConfig())
        assert state.k == (1 if should_merge else 2), f"case {case_no}: wrong merge decision"
    _passed(8, f"merge rule on {len(MERGE_CASES)} hand-built cases")


def test_c09_ratio_arithmetic():
    """Normalised error and approximation ratio match direct formula
    evaluation, including the assumed 0.001 optimum."""
    assert nmse(2.0, 2, 1) == 1.0
    assert nmse(12.0, 3, 2) == 2.0
    assert nmse(0.0, 7, 5) == 0.0
    assert epsilon_ratio(0.001) == 0.0
    assert epsilon_ratio(2.0) == pytest.approx(1999.0, rel=1e-15)
    assert epsilon_ratio(0.002) == pytest.approx(1.0, rel=1e-15)
    assert epsilon_ratio(5.0, sse_opt=0.5) == pytest.approx(9.0, rel=1e-15)
    _passed(9, "ratio arithmetic")


def test_c10_ranking_framework():
    """On a synthetic three-algorithm grid with known dominance the ranking
    table matches the hand computation exactly and within-feature ranks sum
    to M(M+1)/2."""

    def mk(algorithm, dataset, ci, sse_val, wall):
        report = MetricReport(
            sse=sse_val, nmse=sse_val / 10, epsilon_ratio=sse_val * 1000,
            avg_intra=1.0, avg_inter=2.0, ci=ci, csi=1.0, nmi=1.0, wall_seconds=wall,
        )
        return RunStatistics(
            algorithm=algorithm, dataset=dataset, runs=1,
            intra=QuantityStats(1.0, 1.0, 1.0),
            inter=QuantityStats(2.0, 2.0, 2.0),
            wall=QuantityStats(wall, wall, wall),
            reports=[report],
        )

    # "good" dominates everywhere; "mid" and "bad" swap on the shape dataset.
    grid = {
        ("good", "ov1"): mk("good", "ov1", ci=0, sse_val=1.0, wall=0.1),
        ("mid", "ov1"): mk("mid", "ov1", ci=1, sse_val=2.0, wall=0.1),
        ("bad", "ov1"): mk("bad", "ov1", ci=2, sse_val=3.0, wall=0.1),
        ("good", "sh1"): mk("good", "sh1", ci=0, sse_val=1.0, wall=0.1),
        ("mid", "sh1"): mk("mid", "sh1", ci=2, sse_val=2.0, wall=0.1),
        ("bad", "sh1"): mk("bad", "sh1", ci=1, sse_val=3.0, wall=0.1),
    }
    meta = {
        "ov1": DatasetMeta(tags=frozenset({"overlap"}), declared_clusters=2, declared_n=10),
        "sh1": DatasetMeta(tags=frozenset({"shape"}), declared_clusters=2, declared_n=10),
    }
    table = rank_algorithms(grid, meta)
    assert table.dataset_ranks["ov1"] == {"good": 1.0, "mid": 2.0, "bad": 3.0}
    assert table.dataset_ranks["sh1"] == {"good": 1.0, "mid": 3.0, "bad": 2.0}
    assert table.feature_ranks["overlap"] == {"good": 1.0, "mid": 2.0, "bad": 3.0}
    assert table.feature_ranks["shape"] == {"good": 1.0, "mid": 3.0, "bad": 2.0}
    assert table.overall == {"good": 1.0, "mid": 2.5, "bad": 2.5}
    m = len(table.algorithms)
    for ranks in table.feature_ranks.values():
        assert sum(ranks.values()) == pytest.approx(m * (m + 1) / 2)
    _passed(10, "ranking framework")
