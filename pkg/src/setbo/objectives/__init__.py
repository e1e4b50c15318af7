"""Benchmark objectives on sets."""

from .base import ObjectiveSpec
from .clustering import (
    LabeledDataset,
    adjusted_rand_index,
    baseline_inits,
    converged_residual,
    gmm_init_objective,
    kmeans_init_objective,
    load_dataset_csv,
    lloyd,
    make_gaussian_mixture,
    make_gmm_objective,
    make_kmeans_objective,
)
from .pointcloud import (
    active_nn_search,
    chamfer,
    linear_scan,
    make_point_cloud_pool,
    read_xyz,
    write_xyz,
)
from .registry import OBJECTIVE_PARAMS, build_objective
from .synthetic import make_synthetic1, make_synthetic2, synthetic1, synthetic2

__all__ = [
    "ObjectiveSpec",
    "OBJECTIVE_PARAMS",
    "active_nn_search",
    "build_objective",
    "chamfer",
    "linear_scan",
    "make_point_cloud_pool",
    "read_xyz",
    "write_xyz",
    "LabeledDataset",
    "adjusted_rand_index",
    "baseline_inits",
    "converged_residual",
    "gmm_init_objective",
    "kmeans_init_objective",
    "load_dataset_csv",
    "lloyd",
    "make_gaussian_mixture",
    "make_gmm_objective",
    "make_kmeans_objective",
    "make_synthetic1",
    "make_synthetic2",
    "synthetic1",
    "synthetic2",
]
