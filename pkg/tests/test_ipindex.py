import numpy as np
import pytest

from ipclust import ipindex
from ipclust.cluster import KMeansClusterer, KMedoidsClusterer, Partition
from ipclust.dataset import DataMatrix, pairwise_distances
from ipclust.homogeneity import DegenerateTableError
from ipclust.ipindex import (IpConfig, IpStepResult, NoTestableObservationsError, estimate_k,
                             integrated_pvalue, ip_for_k, ip_for_partition, nearest_cluster,
                             observation_pvalue)

FAST = IpConfig(mode="asymptotic")


def line(values):
    x = DataMatrix(np.asarray(values, dtype=float))
    return x, pairwise_distances(x)


def blobs(centers, n_per, spread=1.0, seed=0):
    rng = np.random.default_rng(seed)
    x = np.vstack([rng.normal(c, spread, (n_per, len(c))) for c in centers])
    return DataMatrix(x), np.repeat(np.arange(len(centers)), n_per)


class TestConfig:
    @pytest.mark.parametrize("kwargs", [
        {"alpha": 0.0}, {"alpha": 1.0}, {"w": 2}, {"max_k": 1}, {"b": 0},
        {"nearest_rule": "max"}, {"mode": "exact"}, {"on_degenerate": "ignore"},
    ])
    def test_rejects(self, kwargs):
        with pytest.raises(ValueError):
            IpConfig(**kwargs)


class TestNearestCluster:
    def test_only_choice_at_k2(self):
        _, dist = line([0, 1, 2, 50, 51])
        p = Partition([0, 0, 1, 1, 1], 2)
        assert [nearest_cluster(i, p, dist) for i in range(5)] == [1, 1, 0, 0, 0]

    def test_tie_goes_to_lowest_index(self):
        _, dist = line([0, 0.1, -5, 5])
        p = Partition([0, 0, 1, 2], 3)
        assert nearest_cluster(0, p, dist) == 1
        assert nearest_cluster(0, Partition([0, 0, 2, 1], 3), dist) == 1

    def test_mean_and_median_can_differ(self):
        # from 0: cluster 1 = {3, 3, 100} (mean 35.3, median 3), cluster 2 = {10, 10, 10}
        _, dist = line([0, 1, 3, 3, 100, 10, 10, 10])
        p = Partition([0, 0, 1, 1, 1, 2, 2, 2], 3)
        assert nearest_cluster(0, p, dist, "mean") == 2
        assert nearest_cluster(0, p, dist, "median") == 1

    @pytest.mark.parametrize("rule", ["mean", "median"])
    def test_matches_recomputation(self, rule):
        rng = np.random.default_rng(3)
        x = DataMatrix(rng.normal(size=(40, 2)))
        dist = pairwise_distances(x)
        labels = np.arange(40) % 5
        p = Partition(labels, 5)
        summary = np.mean if rule == "mean" else np.median
        for i in range(40):
            scores = {c: summary([dist.entries[i, j] for j in range(40) if labels[j] == c])
                      for c in range(5) if c != labels[i]}
            assert nearest_cluster(i, p, dist, rule) == min(scores, key=lambda c: (scores[c], c))

    def test_needs_two_clusters(self):
        _, dist = line([0, 1])
        with pytest.raises(ValueError):
            nearest_cluster(0, Partition([0, 0], 1), dist)


class TestObservationPvalue:
    def test_singleton_is_skipped(self):
        _, dist = line([0, 1, 2, 10])
        assert observation_pvalue(3, Partition([0, 0, 0, 1], 2), dist) is None

    def test_degenerate_table(self):
        # from 0: own {9}, nearest {10, 10.5}; after scaling all three exceed 0.5
        _, dist = line([0, 9, 10, 10.5])
        p = Partition([0, 0, 1, 1], 2)
        assert observation_pvalue(0, p, dist) is None
        with pytest.raises(DegenerateTableError):
            observation_pvalue(0, p, dist, IpConfig(on_degenerate="raise"))
        step = ip_for_partition(p, dist)
        assert step.methods.get("skipped-degenerate", 0) >= 1
        assert step.skipped == sum(v is None for v in step.per_observation_p)

    def test_far_separated_clusters(self):
        x, truth = blobs([(0, 0), (1000, 0)], 30)
        dist = pairwise_distances(x)
        p = Partition(truth, 2)
        values = [observation_pvalue(i, p, dist, FAST) for i in range(60)]
        assert max(values) < 0.01

    def test_single_gaussian_spreads_over_unit_interval(self):
        # a forced split of one Gaussian: observations deep inside each half
        # reject strongly, those near the cut do not, and the mean stays above alpha
        for seed in range(3):
            x = DataMatrix(np.random.default_rng(seed).multivariate_normal(
                np.zeros(5), 0.5 * np.eye(5) + 0.5, size=250))
            step = ip_for_k(x, KMeansClusterer(), 2, IpConfig())
            p = np.array([v for v in step.per_observation_p if v is not None])
            assert p.min() < 0.01 and p.max() > 0.5
            assert step.ip >= 0.01

    def test_seeded_monte_carlo(self):
        x, truth = blobs([(0, 0), (3, 0)], 6)
        dist = pairwise_distances(x)
        p = Partition(truth, 2)
        cfg = IpConfig(mode="monte-carlo", b=500)
        assert observation_pvalue(2, p, dist, cfg, seed=9) == observation_pvalue(2, p, dist, cfg, seed=9)


class TestIntegratedPvalue:
    def test_mean(self):
        assert integrated_pvalue([0.2, 0.4, 0.6]) == pytest.approx(0.4)
        assert integrated_pvalue([1, 1, 1, 1]) == 1.0
        assert integrated_pvalue([0.07339]) == 0.07339

    def test_empty(self):
        with pytest.raises(NoTestableObservationsError):
            integrated_pvalue([])

    def test_uniform_inputs_average_to_half(self):
        p = np.random.default_rng(0).uniform(size=1000)
        assert integrated_pvalue(p) == pytest.approx(0.5, abs=0.03)

    def test_all_singletons(self):
        _, dist = line([0, 1, 2, 3])
        with pytest.raises(NoTestableObservationsError):
            ip_for_partition(Partition([0, 1, 2, 3], 4), dist)


class TestIpForK:
    def test_extreme_separation(self):
        x, _ = blobs([(0, 0), (1000, 1000)], 25)
        assert ip_for_k(x, KMeansClusterer(), 2, FAST).ip < 1e-6

    def test_ip_is_mean_of_recorded_pvalues(self):
        x = DataMatrix(np.random.default_rng(1).normal(size=(80, 2)))
        step = ip_for_k(x, KMeansClusterer(), 3)
        tested = [p for p in step.per_observation_p if p is not None]
        assert step.ip == pytest.approx(np.mean(tested), rel=1e-15)
        assert sum(step.methods.values()) == 80
        assert step.skipped == 80 - len(tested)

    def test_k_range(self):
        x = DataMatrix(np.random.default_rng(1).normal(size=(10, 2)))
        for k in (1, 11):
            with pytest.raises(ValueError):
                ip_for_k(x, KMeansClusterer(), k)

    def test_mean_and_median_rules_agree_at_k2(self):
        x = DataMatrix(np.random.default_rng(2).normal(size=(60, 3)))
        a = ip_for_k(x, KMeansClusterer(), 2, IpConfig(nearest_rule="mean"), seed=4)
        b = ip_for_k(x, KMeansClusterer(), 2, IpConfig(nearest_rule="median"), seed=4)
        assert a.per_observation_p == b.per_observation_p and a.ip == b.ip

    def test_relabel_invariance(self):
        x = DataMatrix(np.random.default_rng(5).normal(size=(45, 2)))
        dist = pairwise_distances(x)
        labels = np.arange(45) % 3
        perm = np.array([2, 0, 1])
        a = ip_for_partition(Partition(labels, 3), dist, IpConfig(b=200), seed=1)
        b = ip_for_partition(Partition(perm[labels], 3), dist, IpConfig(b=200), seed=1)
        assert a.per_observation_p == b.per_observation_p

    def test_observation_order_invariance(self):
        rng = np.random.default_rng(6)
        x = rng.normal(size=(40, 2))
        labels = (x[:, 0] > 0).astype(int)
        order = rng.permutation(40)
        a = ip_for_partition(Partition(labels, 2), pairwise_distances(DataMatrix(x)), FAST)
        b = ip_for_partition(Partition(labels[order], 2),
                             pairwise_distances(DataMatrix(x[order])), FAST)
        np.testing.assert_allclose(np.array(b.per_observation_p),
                                   np.array(a.per_observation_p)[order], rtol=1e-12)
        assert a.ip == pytest.approx(b.ip, rel=1e-12)

    def test_step_to_dict_uses_one_based_labels(self):
        x, truth = blobs([(0, 0), (50, 0)], 5)
        entry = ip_for_k(x, KMeansClusterer(), 2, FAST).to_dict()
        assert sorted(set(entry["labels"])) == [1, 2]
        assert set(entry) >= {"k", "ip", "skipped", "test_methods", "p_values"}


class TestEstimateK:
    @pytest.mark.parametrize("seed", range(3))
    def test_single_gaussian(self, seed):
        x = DataMatrix(np.random.default_rng(seed).normal(size=(200, 2)))
        est = estimate_k(x, KMeansClusterer(), FAST)
        assert est.k_hat == 1 and len(est.trajectory) == 1 and not est.cap_reached

    @pytest.mark.parametrize("clusterer", [KMeansClusterer(), KMedoidsClusterer()])
    def test_three_blobs(self, clusterer):
        x, _ = blobs([(0, 0), (50, 0), (0, 50)], 40)
        est = estimate_k(x, clusterer, FAST)
        assert est.k_hat == 3
        ips = [s.ip for s in est.trajectory]
        assert [s.k_tried for s in est.trajectory] == list(range(2, 2 + len(ips)))
        assert all(v < 0.01 for v in ips[:-1]) and ips[-1] >= 0.01

    def test_cap_reached(self):
        centers = [(0, 0), (100, 0), (0, 100), (100, 100), (200, 200)]
        x, _ = blobs(centers, 20)
        est = estimate_k(x, KMeansClusterer(), IpConfig(mode="asymptotic", max_k=3))
        assert est.cap_reached and est.k_hat == 3
        assert [s.k_tried for s in est.trajectory] == [2, 3]

    def test_deterministic(self):
        x = DataMatrix(np.random.default_rng(8).normal(size=(60, 2)))
        a = estimate_k(x, KMeansClusterer(), IpConfig(b=300), seed=5).to_dict()
        b = estimate_k(x, KMeansClusterer(), IpConfig(b=300), seed=5).to_dict()
        assert a == b

    def test_stops_when_ip_reaches_alpha(self, monkeypatch):
        def fake(data, clusterer, k, config, seed, dist=None, metric="euclidean"):
            return IpStepResult(k, [0.07339], 0.07339, 0)

        monkeypatch.setattr(ipindex, "ip_for_k", fake)
        x = DataMatrix(np.zeros((10, 1)) + np.arange(10)[:, None])
        est = estimate_k(x, KMeansClusterer(), IpConfig(alpha=0.05))
        assert est.k_hat == 1
        assert estimate_k(x, KMeansClusterer(), IpConfig(alpha=0.1, max_k=4)).cap_reached

    def test_too_few_observations(self):
        with pytest.raises(ValueError):
            estimate_k(DataMatrix(np.eye(3)), KMeansClusterer())
