"""Integrated p-value (IP) index and step-wise estimation of the number of clusters.

For a partition into k clusters, every observation gets a homogeneity test
comparing its distances to the rest of its own cluster against its
distances to the nearest other cluster. The IP is the mean of those
p-values. Starting at k = 2 the estimator raises k until the IP reaches
``alpha`` and reports the previous k.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cluster import Partition
from .dataset import DataMatrix, DistanceMatrix, pairwise_distances
from .homogeneity import MODES, DegenerateTableError, homogeneity_test

NEAREST_RULES = ("mean", "median")
ON_DEGENERATE = ("skip", "raise")


class NoTestableObservationsError(ValueError):
    """Every observation was skipped, so there is nothing to average."""


@dataclass(frozen=True)
class IpConfig:
    w: int = 3
    alpha: float = 0.01
    nearest_rule: str = "mean"
    b: int = 10_000
    max_k: int = 10
    mode: str = "auto"
    on_degenerate: str = "skip"

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.w < 3:
            raise ValueError(f"w must be >= 3, got {self.w}")
        if self.max_k < 2:
            raise ValueError(f"max_k must be >= 2, got {self.max_k}")
        if self.b < 1:
            raise ValueError(f"b must be >= 1, got {self.b}")
        if self.nearest_rule not in NEAREST_RULES:
            raise ValueError(f"nearest_rule must be one of {NEAREST_RULES}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.on_degenerate not in ON_DEGENERATE:
            raise ValueError(f"on_degenerate must be one of {ON_DEGENERATE}")


@dataclass
class IpStepResult:
    k_tried: int
    per_observation_p: list  # float, or None where skipped
    ip: float
    skipped: int
    partition: Partition | None = None
    methods: dict = field(default_factory=dict)  # test method (or skip reason) -> count

    def to_dict(self) -> dict:
        out = {
            "k": self.k_tried,
            "ip": self.ip,
            "skipped": self.skipped,
            "test_methods": dict(sorted(self.methods.items())),
            "p_values": self.per_observation_p,
        }
        if self.partition is not None:
            out["labels"] = (self.partition.labels + 1).tolist()
        return out


@dataclass
class KEstimate:
    k_hat: int
    trajectory: list
    cap_reached: bool = False

    def to_dict(self) -> dict:
        return {
            "k_hat": self.k_hat,
            "cap_reached": self.cap_reached,
            "trajectory": [step.to_dict() for step in self.trajectory],
        }


def _summary(values: np.ndarray, rule: str) -> float:
    return float(np.mean(values)) if rule == "mean" else float(np.median(values))


def nearest_cluster(i: int, partition: Partition, dist: DistanceMatrix, rule: str = "mean") -> int:
    """The non-mother cluster with the smallest mean (or median) distance from ``i``."""
    if partition.k < 2:
        raise ValueError("need at least two clusters")
    if rule not in NEAREST_RULES:
        raise ValueError(f"rule must be one of {NEAREST_RULES}")
    mother = partition.labels[i]
    row = dist.entries[i]
    best, best_value = None, np.inf
    for c in range(partition.k):
        if c == mother:
            continue
        value = _summary(row[partition.labels == c], rule)
        if value < best_value:
            best, best_value = c, value
    return best


def _mc_seed(seed: int, k: int, i: int) -> np.random.Generator:
    return np.random.default_rng([seed, k, i])


def observation_pvalue(i: int, partition: Partition, dist: DistanceMatrix,
                       config: IpConfig = IpConfig(), seed: int = 0):
    """p-value of observation ``i``'s homogeneity test, or None when skipped.

    Observations are skipped when their cluster is a singleton, and, unless
    ``config.on_degenerate == "raise"``, when all their distances fall in a
    single category.
    """
    return _observation_test(i, partition, dist, config, seed)[0]


def _observation_test(i, partition, dist, config, seed):
    labels = partition.labels
    mother = labels[i]
    own = labels == mother
    own[i] = False
    if not own.any():
        return None, "skipped-singleton"
    near = nearest_cluster(i, partition, dist, config.nearest_rule)
    row = dist.entries[i]
    try:
        result = homogeneity_test(
            row[own], row[labels == near], w=config.w, mode=config.mode,
            b=config.b, seed=_mc_seed(seed, partition.k, i),
        )
    except DegenerateTableError:
        if config.on_degenerate == "raise":
            raise
        return None, "skipped-degenerate"
    return result.p_value, result.method


def integrated_pvalue(p_values) -> float:
    p = np.asarray(list(p_values), dtype=float)
    if p.size == 0:
        raise NoTestableObservationsError("no testable observations")
    return float(p.mean())


def ip_for_partition(partition: Partition, dist: DistanceMatrix,
                     config: IpConfig = IpConfig(), seed: int = 0) -> IpStepResult:
    """IP of an already computed partition."""
    if partition.k < 2:
        raise ValueError("IP needs at least two clusters")
    p_values, methods = [], {}
    for i in range(partition.n):
        p, method = _observation_test(i, partition, dist, config, seed)
        p_values.append(p)
        methods[method] = methods.get(method, 0) + 1
    tested = [p for p in p_values if p is not None]
    return IpStepResult(
        k_tried=partition.k,
        per_observation_p=p_values,
        ip=integrated_pvalue(tested),
        skipped=len(p_values) - len(tested),
        partition=partition,
        methods=methods,
    )


def _prepare(data, dist, metric):
    if dist is None:
        dist = pairwise_distances(data, metric)
    elif dist.n != data.n:
        raise ValueError("data and distance matrix disagree on N")
    return dist


def ip_for_k(data: DataMatrix, clusterer, k: int, config: IpConfig = IpConfig(), seed: int = 0,
             dist: DistanceMatrix | None = None, metric: str = "euclidean") -> IpStepResult:
    """Cluster ``data`` into ``k`` groups with ``clusterer`` and compute the IP."""
    if not 2 <= k <= data.n:
        raise ValueError(f"k must satisfy 2 <= k <= N={data.n}, got {k}")
    dist = _prepare(data, dist, metric)
    partition = clusterer.fit(data, k, dist)
    return ip_for_partition(partition, dist, config, seed)


def estimate_k(data: DataMatrix, clusterer, config: IpConfig = IpConfig(), seed: int = 0,
               dist: DistanceMatrix | None = None, metric: str = "euclidean") -> KEstimate:
    """Step through k = 2, 3, ... and stop at the first IP >= alpha.

    Returns ``k_hat = k - 1`` for the stopping k. If no k up to
    ``min(config.max_k, N)`` stops, returns the last tried k with
    ``cap_reached`` set.
    """
    if data.n < 4:
        raise ValueError(f"need at least 4 observations, got {data.n}")
    dist = _prepare(data, dist, metric)
    trajectory = []
    for k in range(2, min(config.max_k, data.n) + 1):
        step = ip_for_k(data, clusterer, k, config, seed, dist=dist)
        trajectory.append(step)
        if step.ip >= config.alpha:
            return KEstimate(k - 1, trajectory)
    return KEstimate(trajectory[-1].k_tried, trajectory, cap_reached=True)
