"""Estimate the number of clusters from per-observation homogeneity tests on interpoint distances."""
from .cluster import (ClusterConfig, ClusteringError, KMeansClusterer, KMedoidsClusterer,
                      Partition, kmeans, kmedoids_pam, make_clusterer, within_dispersion)
from .comparators import GapResult, adjusted_rand_index, estimate_k_gap, gap_statistic
from .dataset import DataError, DataMatrix, DistanceMatrix, load_csv, load_labeled_csv, pairwise_distances
from .homogeneity import (BinnedTable, DegenerateDistancesError, DegenerateTableError,
                          HomogeneityResult, homogeneity_test)
from .ipindex import (IpConfig, IpStepResult, KEstimate, NoTestableObservationsError, estimate_k,
                      integrated_pvalue, ip_for_k, ip_for_partition, nearest_cluster, observation_pvalue)

__version__ = "0.1.0"
