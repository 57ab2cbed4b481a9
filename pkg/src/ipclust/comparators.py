"""Comparator measures: the gap statistic and the adjusted Rand index."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cluster import Partition, kmeans_objective
from .dataset import DataMatrix, pairwise_distances


class DegenerateDataError(ValueError):
    pass


@dataclass
class GapResult:
    k_values: list
    gap: list
    ref_log_w_sd: list
    n_refs: int
    log_w: list | None = None

    def to_dict(self) -> dict:
        return {
            "k_values": list(self.k_values),
            "gap": list(self.gap),
            "ref_log_w_sd": list(self.ref_log_w_sd),
            "log_w": None if self.log_w is None else list(self.log_w),
            "n_refs": self.n_refs,
            "k_hat": estimate_k_gap(self),
        }


def _log_w_curve(data: DataMatrix, clusterer, ks) -> np.ndarray:
    # W_k over squared Euclidean distances equals the pooled within-cluster
    # sum of squares, which avoids building an N x N matrix per fit.
    dist = None
    if getattr(clusterer, "name", None) == "kmedoids":
        dist = pairwise_distances(data, clusterer.metric)
    return np.log([kmeans_objective(data, clusterer.fit(data, k, dist)) for k in ks])


def reference_sample(data: DataMatrix, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw over the data's bounding box in principal-axis coordinates."""
    x = data.values
    mean = x.mean(axis=0)
    _, _, vt = np.linalg.svd(x - mean, full_matrices=False)
    rotated = (x - mean) @ vt.T
    lo, hi = rotated.min(axis=0), rotated.max(axis=0)
    if np.all(hi - lo <= 0):
        raise DegenerateDataError("data have zero spread along every axis")
    sample = rng.uniform(lo, hi, size=rotated.shape)
    return sample @ vt + mean


def gap_statistic(data: DataMatrix, clusterer, k_max: int = 10, n_refs: int = 100,
                  seed=0) -> GapResult:
    """Gap curve over k = 1..min(k_max, N - 1) against principal-axis uniform references.

    Dispersion uses squared Euclidean distances. Reference set ``r`` is
    drawn from its own stream seeded by ``(seed, r)``.
    """
    if k_max < 1 or n_refs < 1:
        raise ValueError("k_max and n_refs must be >= 1")
    k_max = min(k_max, data.n - 1)
    if np.all(np.ptp(data.values, axis=0) == 0):
        raise DegenerateDataError("data have zero spread along every axis")
    ks = list(range(1, k_max + 1))
    log_w = _log_w_curve(data, clusterer, ks)
    ref = np.empty((n_refs, len(ks)))
    for r in range(n_refs):
        rng = np.random.default_rng([seed, r])
        sample = DataMatrix(reference_sample(data, rng))
        ref[r] = _log_w_curve(sample, clusterer, ks)
    gap = ref.mean(axis=0) - log_w
    sd = ref.std(axis=0)
    return GapResult(ks, gap.tolist(), sd.tolist(), n_refs, log_w.tolist())


def estimate_k_gap(result: GapResult) -> int:
    """k with the largest gap; ties go to the smallest k."""
    if not result.gap:
        raise ValueError("empty gap result")
    return int(result.k_values[int(np.argmax(result.gap))])


def _labels(p) -> np.ndarray:
    return np.asarray(p.labels if isinstance(p, Partition) else p)


def _comb2(x):
    return x * (x - 1) / 2.0


def adjusted_rand_index(p1, p2) -> float:
    """Hubert-Arabie adjusted Rand index. Accepts Partitions or label sequences."""
    a, b = _labels(p1), _labels(p2)
    if a.shape != b.shape:
        raise ValueError(f"partitions have different lengths: {len(a)} and {len(b)}")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1))
    np.add.at(table, (ai, bi), 1)
    index = _comb2(table).sum()
    rows = _comb2(table.sum(axis=1)).sum()
    cols = _comb2(table.sum(axis=0)).sum()
    expected = rows * cols / _comb2(len(a))
    maximum = (rows + cols) / 2.0
    if maximum == expected:
        # both partitions trivial (all one cluster or all singletons)
        return 1.0
    return float((index - expected) / (maximum - expected))
