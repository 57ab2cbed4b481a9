"""Clustering backends that take the number of clusters as given.

Labels are 0-based internally (``0..k-1``); reports and CSV output shift
them to ``1..k``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import DataMatrix, DistanceMatrix, pairwise_distances


class ClusteringError(RuntimeError):
    """The backend could not produce k non-empty clusters."""


@dataclass(frozen=True)
class Partition:
    labels: np.ndarray
    k: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64).copy()
        if labels.ndim != 1:
            raise ValueError("labels must be one-dimensional")
        if self.k < 1:
            raise ValueError(f"k must be positive, got {self.k}")
        if labels.min() < 0 or labels.max() >= self.k:
            raise ValueError(f"labels must lie in 0..{self.k - 1}")
        sizes = np.bincount(labels, minlength=self.k)
        if np.any(sizes == 0):
            raise ValueError(f"empty cluster(s): {np.flatnonzero(sizes == 0).tolist()}")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)

    def members(self, cluster: int) -> np.ndarray:
        return np.flatnonzero(self.labels == cluster)


@dataclass(frozen=True)
class ClusterConfig:
    restarts: int = 10
    max_iterations: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def _check_k(k: int, n: int) -> None:
    if not 2 <= k <= n:
        raise ValueError(f"k must satisfy 2 <= k <= N={n}, got {k}")


def _sq_dists(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    if x.shape[1] <= 8:
        out = (x[:, :1] - centers[:, 0]) ** 2
        for f in range(1, x.shape[1]):
            out += (x[:, f : f + 1] - centers[:, f]) ** 2
        return out
    diff = x[:, None, :] - centers[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def _kmeanspp(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    closest = _sq_dists(x, x[chosen]).ravel()
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            idx = int(rng.choice(n, p=closest / total))
        else:
            # every point coincides with a chosen center
            idx = int(rng.integers(n))
        chosen.append(idx)
        closest = np.minimum(closest, _sq_dists(x, x[idx : idx + 1]).ravel())
    return x[chosen].copy()


def _centers(x, labels, k):
    onehot = np.zeros((k, len(x)))
    onehot[labels, np.arange(len(x))] = 1.0
    sizes = onehot.sum(axis=1)
    return (onehot @ x) / np.maximum(sizes, 1)[:, None], sizes


def _wss(x, labels, k):
    centers, _ = _centers(x, labels, k)
    return float(((x - centers[labels]) ** 2).sum())


def _lloyd(x, centers, max_iterations):
    """Run Lloyd iterations; returns (labels, objective, objective history)."""
    k = centers.shape[0]
    n = len(x)
    history = []
    labels = None
    for _ in range(max_iterations):
        d2 = _sq_dists(x, centers)
        new_labels = np.argmin(d2, axis=1)
        sizes = np.bincount(new_labels, minlength=k)
        if sizes.min() == 0:
            # empty-cluster repair: move the point farthest from its center
            own = d2[np.arange(n), new_labels]
            for empty in np.flatnonzero(sizes == 0):
                movable = sizes[new_labels] > 1
                if not movable.any():
                    break
                far = int(np.argmax(np.where(movable, own, -1.0)))
                sizes[new_labels[far]] -= 1
                new_labels[far] = empty
                sizes[empty] = 1
                own[far] = 0.0
        new_centers, _ = _centers(x, new_labels, k)
        history.append(float(((x - new_centers[new_labels]) ** 2).sum()))
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        centers = np.where(sizes[:, None] > 0, new_centers, centers)
    return labels, history[-1], history


def kmeans(data: DataMatrix, k: int, config: ClusterConfig = ClusterConfig()) -> Partition:
    """K-means: k-means++ seeding, Lloyd iterations, best of ``config.restarts``.

    Nearest-center ties go to the lowest cluster index and objective ties
    between restarts go to the earliest restart.
    """
    x = data.values
    _check_k(k, data.n)
    best_labels, best_obj = None, np.inf
    for restart in range(config.restarts):
        rng = np.random.default_rng([config.seed, restart])
        labels, obj, _ = _lloyd(x, _kmeanspp(x, k, rng), config.max_iterations)
        if np.bincount(labels, minlength=k).min() == 0:
            continue
        if obj < best_obj:
            best_labels, best_obj = labels, obj
    if best_labels is None:
        raise ClusteringError(
            f"could not form {k} non-empty clusters after {config.restarts} restarts"
        )
    return Partition(best_labels, k)


def kmeans_objective(data: DataMatrix, partition: Partition) -> float:
    """Within-cluster sum of squared distances to the cluster means."""
    return _wss(data.values, partition.labels, partition.k)


def _assign_to_medoids(d: np.ndarray, medoids: np.ndarray) -> np.ndarray:
    labels = np.argmin(d[:, medoids], axis=1)
    labels[medoids] = np.arange(len(medoids))
    return labels


def pam_cost(dist: DistanceMatrix, medoids) -> float:
    """Total distance from every observation to its nearest medoid."""
    return float(dist.entries[:, np.asarray(medoids)].min(axis=1).sum())


def _pam_build(d: np.ndarray, k: int) -> list[int]:
    medoids = [int(np.argmin(d.sum(axis=1)))]
    nearest = d[:, medoids[0]].copy()
    for _ in range(1, k):
        # gain[c] = sum_j max(nearest_j - d(j, c), 0)
        gain = np.maximum(nearest[:, None] - d, 0.0).sum(axis=0)
        gain[medoids] = -np.inf
        c = int(np.argmax(gain))
        medoids.append(c)
        nearest = np.minimum(nearest, d[:, c])
    return medoids


def _pam_swap(d: np.ndarray, medoids: list[int], max_iterations: int) -> list[int]:
    n = d.shape[0]
    medoids = list(medoids)
    for _ in range(max_iterations):
        md = d[:, medoids]
        order = np.argsort(md, axis=1, kind="stable")
        near_idx = order[:, 0]
        near = md[np.arange(n), near_idx]
        second = md[np.arange(n), order[:, 1]] if len(medoids) > 1 else np.full(n, np.inf)
        is_medoid = np.zeros(n, dtype=bool)
        is_medoid[medoids] = True
        best = (0.0, None, None)
        for mi in range(len(medoids)):
            # cost change of replacing medoid mi by each candidate h (columns)
            owned = (near_idx == mi)[:, None]
            delta = np.where(
                owned,
                np.minimum(second[:, None], d) - near[:, None],
                np.minimum(near[:, None], d) - near[:, None],
            ).sum(axis=0)
            delta[is_medoid] = np.inf
            h = int(np.argmin(delta))
            if delta[h] < best[0] - 1e-12 * max(1.0, near.sum()):
                best = (float(delta[h]), mi, h)
        if best[1] is None:
            break
        medoids[best[1]] = best[2]
    return medoids


def pam_medoids(dist: DistanceMatrix, k: int, config: ClusterConfig = ClusterConfig()) -> np.ndarray:
    """Medoid indices (sorted ascending) from the BUILD and SWAP phases."""
    _check_k(k, dist.n)
    d = dist.entries
    medoids = _pam_swap(d, _pam_build(d, k), config.max_iterations)
    return np.sort(np.array(medoids, dtype=np.int64))


def kmedoids_pam(dist: DistanceMatrix, k: int, config: ClusterConfig = ClusterConfig()) -> Partition:
    """Partitioning around medoids. Deterministic; ``config.seed`` is unused.

    Cluster ``j`` is the one whose medoid has the ``j``-th smallest index.
    """
    medoids = pam_medoids(dist, k, config)
    return Partition(_assign_to_medoids(dist.entries, medoids), k)


def within_dispersion(dist: DistanceMatrix, partition: Partition) -> float:
    """Sum over clusters of within-cluster pairwise distance sums over ``2 n_r``.

    Pairs are ordered, so each unordered pair counts twice; pass squared
    Euclidean distances to get the classical pooled within-cluster sum of
    squares.
    """
    if partition.n != dist.n:
        raise ValueError("partition and distance matrix disagree on N")
    d = dist.entries
    total = 0.0
    for j in range(partition.k):
        idx = partition.members(j)
        total += d[np.ix_(idx, idx)].sum() / (2 * len(idx))
    return float(total)


class KMeansClusterer:
    """Clusterer handle backed by :func:`kmeans`."""

    name = "kmeans"

    def __init__(self, config: ClusterConfig = ClusterConfig()):
        self.config = config

    def fit(self, data: DataMatrix, k: int, dist: DistanceMatrix | None = None) -> Partition:
        if k == 1:
            return Partition(np.zeros(data.n, dtype=np.int64), 1)
        return kmeans(data, k, self.config)

    def with_seed(self, seed: int) -> "KMeansClusterer":
        return KMeansClusterer(ClusterConfig(self.config.restarts, self.config.max_iterations, seed))


class KMedoidsClusterer:
    """Clusterer handle backed by :func:`kmedoids_pam`."""

    name = "kmedoids"

    def __init__(self, config: ClusterConfig = ClusterConfig(), metric: str = "euclidean"):
        self.config = config
        self.metric = metric

    def fit(self, data: DataMatrix, k: int, dist: DistanceMatrix | None = None) -> Partition:
        if k == 1:
            return Partition(np.zeros(data.n, dtype=np.int64), 1)
        if dist is None:
            dist = pairwise_distances(data, self.metric)
        return kmedoids_pam(dist, k, self.config)

    def with_seed(self, seed: int) -> "KMedoidsClusterer":
        cfg = ClusterConfig(self.config.restarts, self.config.max_iterations, seed)
        return KMedoidsClusterer(cfg, self.metric)


def make_clusterer(algorithm: str, config: ClusterConfig = ClusterConfig(), metric: str = "euclidean"):
    if algorithm == "kmeans":
        return KMeansClusterer(config)
    if algorithm == "kmedoids":
        return KMedoidsClusterer(config, metric)
    raise ValueError(f"unknown algorithm {algorithm!r}; choose 'kmeans' or 'kmedoids'")
