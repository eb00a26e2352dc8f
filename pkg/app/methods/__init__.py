from app.methods.weights import compute_distances, normalize_distances, kernel_weights, distance_weight_matrix
from app.methods.conformal import pinterval_conformal
from app.methods.clustering import kmeans, calinski_harabasz, select_n_clusters
from app.methods.grouped import (
    GroupedCalibration,
    pinterval_mondrian,
    pinterval_ccp,
    group_embeddings,
    split_for_clustering,
)
from app.methods.bccp import pinterval_bccp, assign_bins, quantile_breaks
from app.methods.bootstrap import pinterval_bootstrap, point_rng
from app.methods.parametric import pinterval_parametric, estimate_params, dist_quantile

__all__ = [
    "compute_distances",
    "normalize_distances",
    "kernel_weights",
    "distance_weight_matrix",
    "pinterval_conformal",
    "kmeans",
    "calinski_harabasz",
    "select_n_clusters",
    "GroupedCalibration",
    "pinterval_mondrian",
    "pinterval_ccp",
    "group_embeddings",
    "split_for_clustering",
    "pinterval_bccp",
    "assign_bins",
    "quantile_breaks",
    "pinterval_bootstrap",
    "point_rng",
    "pinterval_parametric",
    "estimate_params",
    "dist_quantile",
]
