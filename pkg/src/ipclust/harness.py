"""Estimation on user data and seeded replication studies."""
from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .cluster import ClusterConfig, make_clusterer
from .comparators import adjusted_rand_index, estimate_k_gap, gap_statistic
from .dataset import load_csv, load_labeled_csv, pairwise_distances
from .ipindex import IpConfig, estimate_k
from .simgen import SETTINGS, generate

# Settings the generators leave open. S3's displacement is unspecified by
# the study design; (3, 3) puts IP efficacy near 90% at desk scale.
SETTING_DEFAULTS = {
    "S2": {"separation": 5.5},
    "S3": {"shift": (3.0, 3.0), "n_per": 250},
}
TRUE_K = {"S1a": 1, "S1b": 2, "S1a'": 1, "S1b'": 2, "S2": 3, "S3": 2}


@dataclass
class ExperimentConfig:
    setting: str
    replications: int = 25
    ip_config: IpConfig = field(default_factory=IpConfig)
    w_values: tuple = (3,)
    nearest_rules: tuple = ("mean",)
    algorithm: str = "kmeans"
    cluster_config: ClusterConfig = field(default_factory=ClusterConfig)
    metric: str = "euclidean"
    gap: bool = False
    gap_refs: int = 100
    gap_k_max: int = 10
    base_seed: int = 0
    setting_options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.setting not in SETTINGS:
            raise ValueError(f"unknown setting {self.setting!r}; choose from {SETTINGS}")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")

    def options(self) -> dict:
        return {**SETTING_DEFAULTS.get(self.setting, {}), **self.setting_options}

    def measures(self) -> list[str]:
        names = [f"ip_w{w}_{rule}" for w in self.w_values for rule in self.nearest_rules]
        return names + (["gap"] if self.gap else [])

    def to_dict(self) -> dict:
        out = asdict(self)
        out["setting_options"] = {k: _jsonable(v) for k, v in self.options().items()}
        out["measures"] = self.measures()
        out["true_k"] = TRUE_K[self.setting]
        return out


@dataclass
class EfficacyReport:
    config: ExperimentConfig
    true_k: int
    k_hats: dict  # measure -> per-replication k_hat (None on error)
    replications: list  # per-replication detail
    seconds: list  # wall clock per replication

    def efficacy(self) -> dict:
        n = self.config.replications
        return {
            m: 100.0 * sum(k == self.true_k for k in ks) / n for m, ks in self.k_hats.items()
        }

    def to_dict(self, timings: bool = False) -> dict:
        out = {
            "config": self.config.to_dict(),
            "true_k": self.true_k,
            "efficacy_percent": self.efficacy(),
            "k_hat": self.k_hats,
            "replications": self.replications,
        }
        if timings:
            out["seconds_per_replication"] = self.seconds
        return out


def _jsonable(value):
    if isinstance(value, (tuple, list, np.ndarray)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def dumps(report: dict) -> str:
    """Deterministic JSON text for a report."""
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=True) + "\n"


def derive_seeds(base_seed: int, index: int, count: int = 4) -> list[int]:
    """Independent 64-bit seeds for replication ``index`` of a study."""
    state = np.random.SeedSequence([base_seed, index]).generate_state(count, np.uint64)
    return [int(s) for s in state]


def _ip_measure(data, dist, clusterer, ip_config, seed):
    est = estimate_k(data, clusterer, ip_config, seed, dist=dist)
    return est, {
        "k_hat": est.k_hat,
        "cap_reached": est.cap_reached,
        "ip": [step.ip for step in est.trajectory],
        "skipped": [step.skipped for step in est.trajectory],
    }


def run_replication(config: ExperimentConfig, index: int) -> dict:
    data_seed, cluster_seed, ip_seed, gap_seed = derive_seeds(config.base_seed, index)
    record = {"replication": index, "seed": data_seed, "measures": {}, "errors": {}}
    start = time.perf_counter()
    try:
        data, _ = generate(config.setting, seed=data_seed, **config.options())
        dist = pairwise_distances(data, config.metric)
    except Exception as exc:  # noqa: BLE001 - recorded, study continues
        record["errors"]["generate"] = f"{type(exc).__name__}: {exc}"
        record["seconds"] = time.perf_counter() - start
        return record
    cluster_config = ClusterConfig(
        config.cluster_config.restarts, config.cluster_config.max_iterations, cluster_seed
    )
    clusterer = make_clusterer(config.algorithm, cluster_config, config.metric)
    for w in config.w_values:
        for rule in config.nearest_rules:
            name = f"ip_w{w}_{rule}"
            ip_config = IpConfig(**{**asdict(config.ip_config), "w": w, "nearest_rule": rule})
            try:
                _, summary = _ip_measure(data, dist, clusterer, ip_config, ip_seed)
                record["measures"][name] = summary
            except Exception as exc:  # noqa: BLE001
                record["errors"][name] = f"{type(exc).__name__}: {exc}"
    if config.gap:
        try:
            result = gap_statistic(data, clusterer, config.gap_k_max, config.gap_refs, gap_seed)
            record["measures"]["gap"] = {"k_hat": estimate_k_gap(result), "gap": result.gap}
        except Exception as exc:  # noqa: BLE001
            record["errors"]["gap"] = f"{type(exc).__name__}: {exc}"
    record["seconds"] = time.perf_counter() - start
    return record


def run_simulation(config: ExperimentConfig, jobs: int = 1) -> EfficacyReport:
    """Run ``config.replications`` seeded replications and tabulate efficacy.

    Replication ``r`` depends only on ``(config, r)``, so the report is the
    same for any ``jobs``.
    """
    indices = range(config.replications)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(run_replication, [config] * len(indices), indices))
    else:
        records = [run_replication(config, r) for r in indices]
    seconds = [rec.pop("seconds") for rec in records]
    k_hats = {
        m: [rec["measures"].get(m, {}).get("k_hat") for rec in records]
        for m in config.measures()
    }
    return EfficacyReport(config, TRUE_K[config.setting], k_hats, records, seconds)


@dataclass
class EstimateConfig:
    ip_config: IpConfig = field(default_factory=IpConfig)
    algorithm: str = "kmeans"
    cluster_config: ClusterConfig = field(default_factory=ClusterConfig)
    metric: str = "euclidean"
    seed: int = 0
    has_header: bool = False
    label_column: int | None = None
    gap: bool = False
    gap_refs: int = 100
    gap_k_max: int = 10
    include_p_values: bool = True


def run_estimate(path, config: EstimateConfig = EstimateConfig()) -> dict:
    """Estimate the number of clusters in a CSV file; returns a report dict."""
    truth = None
    if config.label_column is None:
        data = load_csv(path, config.has_header)
    else:
        data, truth = load_labeled_csv(path, config.label_column, config.has_header)
    cluster_config = ClusterConfig(
        config.cluster_config.restarts, config.cluster_config.max_iterations, config.seed
    )
    clusterer = make_clusterer(config.algorithm, cluster_config, config.metric)
    dist = pairwise_distances(data, config.metric)
    est = estimate_k(data, clusterer, config.ip_config, config.seed, dist=dist)
    trajectory = []
    for step in est.trajectory:
        entry = step.to_dict()
        if not config.include_p_values:
            entry.pop("p_values")
        if truth is not None:
            entry["ari_vs_truth"] = adjusted_rand_index(step.partition, truth)
        trajectory.append(entry)
    report = {
        "input": {"path": str(path), "n": data.n, "dim": data.dim},
        "config": {
            "ip": asdict(config.ip_config),
            "algorithm": config.algorithm,
            "cluster": asdict(cluster_config),
            "metric": config.metric,
            "seed": config.seed,
        },
        "k_hat": est.k_hat,
        "cap_reached": est.cap_reached,
        "trajectory": trajectory,
    }
    if config.gap:
        result = gap_statistic(data, clusterer, config.gap_k_max, config.gap_refs, config.seed)
        report["gap"] = result.to_dict()
    return report
