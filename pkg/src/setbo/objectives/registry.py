"""Name-based construction of objectives, used by the CLI config."""

from __future__ import annotations

from typing import Any

from .base import ObjectiveSpec
from .clustering import (
    load_dataset_csv,
    make_gaussian_mixture,
    make_gmm_objective,
    make_kmeans_objective,
)
from .synthetic import make_synthetic1, make_synthetic2

OBJECTIVE_PARAMS = {
    "synthetic1": {"m"},
    "synthetic2": {"m"},
    "kmeans_init": {"dataset", "split_seed"},
    "gmm_init": {"dataset", "split_seed"},
}

DATASET_KEYS = {"path", "label_column", "k_clusters", "n", "d", "k", "seed"}


def _dataset(spec: dict[str, Any]):
    unknown = set(spec) - DATASET_KEYS
    if unknown:
        raise ValueError(f"unknown dataset keys: {sorted(unknown)}")
    if "path" in spec:
        if "k_clusters" not in spec:
            raise ValueError("a dataset file needs k_clusters")
        return load_dataset_csv(spec["path"], int(spec["k_clusters"]), spec.get("label_column"))
    data, _ = make_gaussian_mixture(
        n=int(spec.get("n", 500)),
        d=int(spec.get("d", 5)),
        k=int(spec.get("k", 10)),
        seed=int(spec.get("seed", 0)),
    )
    return data


def build_objective(name: str, **params) -> ObjectiveSpec:
    """Construct a registered objective from plain parameters.

    >>> build_objective("synthetic1", m=3).domain.m
    3
    """
    if name not in OBJECTIVE_PARAMS:
        raise ValueError(f"unknown objective {name!r}; choose from {sorted(OBJECTIVE_PARAMS)}")
    unknown = set(params) - OBJECTIVE_PARAMS[name]
    if unknown:
        raise ValueError(f"unknown parameters for {name}: {sorted(unknown)}")
    if name == "synthetic1":
        return make_synthetic1(int(params.get("m", 20)))
    if name == "synthetic2":
        return make_synthetic2(int(params.get("m", 20)))
    data = _dataset(params.get("dataset", {}))
    split_seed = int(params.get("split_seed", 0))
    if name == "kmeans_init":
        return make_kmeans_objective(data, split_seed)
    return make_gmm_objective(data, split_seed)
