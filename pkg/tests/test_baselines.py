"""Lloyd k-means and k-means++ seeding contracts."""

import numpy as np
import pytest

from ecastar.baselines import KmConfig, kmeans, kmeanspp_seed, random_seed
from ecastar.core import ConfigError
from ecastar.dataset import Dataset, generate_blobs
from ecastar.metrics import sse
from ecastar.stats import RandomStream


class TestKmeansppSeed:
    def test_single_seed_is_a_point(self):
        ds = Dataset([[0.0], [5.0], [9.0]])
        seed = kmeanspp_seed(ds, 1, RandomStream(0))
        assert seed.shape == (1, 1)
        assert seed[0, 0] in (0.0, 5.0, 9.0)

    def test_k_equals_n_selects_every_point(self):
        for n in (2, 3, 4, 5):
            pts = np.arange(n, dtype=float).reshape(-1, 1) * 3
            ds = Dataset(pts)
            seeds = kmeanspp_seed(ds, n, RandomStream(n))
            assert sorted(seeds[:, 0].tolist()) == sorted(pts[:, 0].tolist())

    def test_deterministic(self):
        ds = Dataset(np.random.default_rng(0).normal(size=(40, 2)))
        a = kmeanspp_seed(ds, 4, RandomStream(7))
        b = kmeanspp_seed(ds, 4, RandomStream(7))
        assert np.array_equal(a, b)

    def test_k_too_large(self):
        ds = Dataset([[0.0], [1.0]])
        with pytest.raises(ConfigError):
            kmeanspp_seed(ds, 3, RandomStream(0))

    def test_coincident_points_accepted_after_retries(self):
        ds = Dataset(np.zeros((4, 2)))
        seeds = kmeanspp_seed(ds, 3, RandomStream(1))
        assert seeds.shape == (3, 2)


class TestRandomSeed:
    def test_distinct_rows(self):
        ds = Dataset(np.arange(10, dtype=float).reshape(-1, 1))
        seeds = random_seed(ds, 5, RandomStream(2))
        assert len(np.unique(seeds[:, 0])) == 5


class TestKmeans:
    def test_single_cluster_mean(self):
        ds = Dataset([[0.0], [2.0]])
        result = kmeans(ds, KmConfig(k=1), seed=0)
        assert result.centroids[0, 0] == 1.0
        assert result.sse_trace[-1] == 2.0

    def test_two_lloyd_steps_by_hand(self):
        ds = Dataset([[0.0], [1.0], [10.0], [11.0]])
        result = kmeans(ds, KmConfig(k=2), seed=0, initial_centroids=[[0.0], [10.0]])
        assert sorted(result.centroids[:, 0].tolist()) == [0.5, 10.5]
        assert result.converged

    def test_sse_trace_non_increasing(self):
        rng = np.random.default_rng(3)
        for trial in range(20):
            n = int(rng.integers(8, 40))
            ds = Dataset(rng.normal(size=(n, 2)) * rng.uniform(1, 10))
            k = int(rng.integers(1, 5))
            result = kmeans(ds, KmConfig(k=k, init="random_points"), seed=trial)
            trace = result.sse_trace
            assert all(a >= b - 1e-9 for a, b in zip(trace, trace[1:]))

    def test_deterministic(self):
        data, _ = generate_blobs(k=3, per_cluster=25, d=2, spread=0.5, separation=8.0, seed=4)
        a = kmeans(data, KmConfig(k=3), seed=5)
        b = kmeans(data, KmConfig(k=3), seed=5)
        assert np.array_equal(a.centroids, b.centroids)
        assert np.array_equal(a.labels, b.labels)
        assert a.sse_trace == b.sse_trace

    def test_result_shape_contract(self):
        data, _ = generate_blobs(k=2, per_cluster=20, d=3, spread=0.4, separation=7.0, seed=6)
        result = kmeans(data, KmConfig(k=2), seed=7)
        assert result.n_clusters == 2
        assert np.array_equal(np.unique(result.labels), [0, 1])
        assert result.intra_trace == ()
        assert result.iterations == len(result.sse_trace)

    def test_empty_cluster_repair_keeps_k(self):
        # Two far identical seeds force one cluster empty immediately.
        ds = Dataset([[0.0], [1.0], [2.0], [3.0]])
        result = kmeans(ds, KmConfig(k=2, max_iter=10), seed=0, initial_centroids=[[100.0], [101.0]])
        assert result.n_clusters == 2

    def test_invalid_config(self):
        ds = Dataset([[0.0], [1.0]])
        with pytest.raises(ConfigError):
            kmeans(ds, KmConfig(k=0), seed=0)
        with pytest.raises(ConfigError):
            kmeans(ds, KmConfig(k=5), seed=0)
        with pytest.raises(ConfigError):
            kmeans(ds, KmConfig(k=1, init="fancy"), seed=0)

    def test_kmeanspp_beats_random_on_blobs(self):
        # Statistical check at reduced size; the acceptance suite runs the
        # full 30-seed version.
        data, _ = generate_blobs(k=4, per_cluster=40, d=2, spread=0.8, separation=12.0, seed=8)
        pp, rand = [], []
        for s in range(10):
            pp.append(kmeans(data, KmConfig(k=4, init="kmeanspp"), seed=s).sse_trace[-1])
            rand.append(kmeans(data, KmConfig(k=4, init="random_points"), seed=s).sse_trace[-1])
        assert np.mean(pp) <= np.mean(rand) * 1.05

    def test_final_sse_matches_metric(self):
        data, _ = generate_blobs(k=2, per_cluster=15, d=2, spread=0.5, separation=9.0, seed=9)
        result = kmeans(data, KmConfig(k=2), seed=10)
        assert result.sse_trace[-1] == pytest.approx(
            sse(data.points, result.centroids), rel=1e-9
        )
