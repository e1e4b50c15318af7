"""Clustering-initialization objectives and the classic initialization baselines.

The objectives take a set of ``k`` initial centers, run Lloyd's algorithm or
diagonal-covariance EM on a 70% training split, and score the induced
partition of the held-out 30% with ``1 - ARI`` against the true labels.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp, softmax
from sklearn.metrics import adjusted_rand_score

from ..acquisition import BoxDomain
from ..kernels import as_set, canonical_rows
from ..rng import substream
from .base import ObjectiveSpec

TRAIN_FRACTION = 0.7
VAR_FLOOR = 1e-6


@dataclass(frozen=True)
class LabeledDataset:
    points: np.ndarray
    labels: np.ndarray | None
    k_clusters: int

    def __post_init__(self):
        P = np.asarray(self.points, dtype=float)
        if P.ndim != 2 or not np.all(np.isfinite(P)):
            raise ValueError("points must be a finite (N, d) array")
        if self.k_clusters < 1 or P.shape[0] < self.k_clusters:
            raise ValueError("need 1 <= k_clusters <= N")
        object.__setattr__(self, "points", P)
        if self.labels is not None:
            lab = np.asarray(self.labels)
            if lab.shape != (P.shape[0],) or np.any(lab < 0):
                raise ValueError("labels must be a nonnegative integer vector of length N")
            object.__setattr__(self, "labels", lab.astype(int))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def bounding_box(self) -> BoxDomain:
        lo, hi = self.points.min(axis=0), self.points.max(axis=0)
        hi = np.where(hi > lo, hi, lo + 1.0)
        return BoxDomain(lo, hi, self.k_clusters)


def make_gaussian_mixture(
    n: int = 500, d: int = 5, k: int = 10, seed: int = 0, spread: float = 10.0, std: float = 1.0
) -> tuple[LabeledDataset, np.ndarray]:
    """Isotropic Gaussian blobs with centers uniform in ``[-spread, spread]^d``.

    Returns the dataset and the generating centers.
    """
    rng = substream(seed, "mixture")
    centers = rng.uniform(-spread, spread, size=(k, d))
    labels = np.arange(n) % k
    rng.shuffle(labels)
    points = centers[labels] + std * rng.standard_normal((n, d))
    return LabeledDataset(points, labels, k), centers


def load_dataset_csv(path, k_clusters: int, label_column: str | None = None) -> LabeledDataset:
    """Read a headed CSV; every column except ``label_column`` is a coordinate."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: missing header")
        if label_column is not None and label_column not in reader.fieldnames:
            raise ValueError(f"{path}: no column named {label_column!r}")
        cols = [c for c in reader.fieldnames if c != label_column]
        rows, labels = [], []
        for row in reader:
            rows.append([float(row[c]) for c in cols])
            if label_column is not None:
                labels.append(int(row[label_column]))
    return LabeledDataset(np.array(rows), np.array(labels) if label_column else None, k_clusters)


def train_test_split(n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    perm = substream(seed, "split").permutation(n)
    cut = int(round(TRAIN_FRACTION * n))
    return np.sort(perm[:cut]), np.sort(perm[cut:])


def adjusted_rand_index(labels_true, labels_pred) -> float:
    return float(adjusted_rand_score(labels_true, labels_pred))


def _sq_dists(P, C):
    return ((P[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)


def lloyd(points, centers, max_iter: int = 300) -> tuple[np.ndarray, np.ndarray]:
    """Lloyd's algorithm from ``centers``; returns ``(centers, labels)``.

    A center that loses all its points moves to the point farthest from its
    currently assigned center.
    """
    P = np.asarray(points, dtype=float)
    C = np.array(centers, dtype=float)
    k = C.shape[0]
    labels = None
    for _ in range(max_iter):
        D = _sq_dists(P, C)
        new = np.argmin(D, axis=1)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for j in range(k):
            members = labels == j
            if members.any():
                C[j] = P[members].mean(axis=0)
            else:
                far = int(np.argmax(D[np.arange(P.shape[0]), labels]))
                C[j] = P[far]
                labels[far] = j
                D[far] = _sq_dists(P[far : far + 1], C)[0]
    return C, labels


def converged_residual(X, data: LabeledDataset) -> float:
    """Softmax-weighted squared distance between points and Lloyd-converged centers."""
    C, _ = lloyd(data.points, canonical_rows(as_set(X)))
    D = _sq_dists(data.points, C)
    W = softmax(-D, axis=1)
    return float(np.sum(W * D))


def kmeans_init_objective(X, data: LabeledDataset, split_seed: int = 0) -> float:
    """``1 - ARI`` on the test split of Lloyd's clustering started at ``X``."""
    X = canonical_rows(as_set(X))
    if X.shape != (data.k_clusters, data.d):
        raise ValueError(f"expected {data.k_clusters} centers of dimension {data.d}")
    if data.labels is None:
        raise ValueError("kmeans_init_objective needs ground-truth labels")
    train, test = train_test_split(data.n, split_seed)
    C, _ = lloyd(data.points[train], X)
    pred = np.argmin(_sq_dists(data.points[test], C), axis=1)
    return 1.0 - adjusted_rand_index(data.labels[test], pred)


def _diag_log_resp(P, weights, means, variances):
    log_prob = -0.5 * (
        np.sum(np.log(2 * np.pi * variances), axis=1)[None, :]
        + (((P[:, None, :] - means[None]) ** 2) / variances[None]).sum(axis=2)
    )
    weighted = log_prob + np.log(np.maximum(weights, 1e-300))[None, :]
    norm = logsumexp(weighted, axis=1)
    return weighted - norm[:, None], float(norm.sum())


def gmm_em(points, means, tol: float = 1e-4, max_iter: int = 200):
    """EM for a diagonal GMM from ``means``, unit variances and uniform weights.

    Returns ``(weights, means, variances)``.
    """
    P = np.asarray(points, dtype=float)
    mu = np.array(means, dtype=float)
    k, d = mu.shape
    w = np.full(k, 1.0 / k)
    var = np.ones((k, d))
    prev = None
    for _ in range(max_iter):
        log_r, ll = _diag_log_resp(P, w, mu, var)
        if prev is not None and abs(ll - prev) <= tol * abs(prev):
            break
        prev = ll
        R = np.exp(log_r)
        nk = R.sum(axis=0)
        alive = nk > 1e-10
        w = nk / nk.sum()
        new_mu = (R.T @ P) / np.where(alive, nk, 1.0)[:, None]
        mu = np.where(alive[:, None], new_mu, mu)
        sq = (P[:, None, :] - mu[None]) ** 2
        new_var = np.einsum("nk,nkd->kd", R, sq) / np.where(alive, nk, 1.0)[:, None]
        var = np.maximum(np.where(alive[:, None], new_var, var), VAR_FLOOR)
    return w, mu, var


def gmm_init_objective(X, data: LabeledDataset, split_seed: int = 0) -> float:
    """``1 - ARI`` on the test split of MAP assignments of an EM-fitted GMM."""
    X = canonical_rows(as_set(X))
    if X.shape != (data.k_clusters, data.d):
        raise ValueError(f"expected {data.k_clusters} means of dimension {data.d}")
    if data.labels is None:
        raise ValueError("gmm_init_objective needs ground-truth labels")
    train, test = train_test_split(data.n, split_seed)
    w, mu, var = gmm_em(data.points[train], X)
    log_r, _ = _diag_log_resp(data.points[test], w, mu, var)
    return 1.0 - adjusted_rand_index(data.labels[test], np.argmax(log_r, axis=1))


def kmeans_pp(points, k: int, rng: np.random.Generator) -> np.ndarray:
    """Plain D² seeding: each new center drawn proportionally to squared distance."""
    P = np.asarray(points, dtype=float)
    n = P.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = np.sum((P - P[chosen[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            rest = np.setdiff1d(np.arange(n), chosen)
            idx = int(rng.choice(rest))
        chosen.append(idx)
        d2 = np.minimum(d2, np.sum((P - P[idx]) ** 2, axis=1))
    return P[chosen].copy()


def baseline_inits(data: LabeledDataset, kind: str, rng: np.random.Generator) -> np.ndarray:
    """Initial centers from one of ``random_box``, ``data_sample``, ``kmeans_pp``, ``kmeans_result``."""
    k = data.k_clusters
    if kind == "random_box":
        return data.bounding_box().sample(rng, 1)[0]
    if kind == "data_sample":
        if k > data.n:
            raise ValueError("k exceeds the number of points")
        return data.points[rng.choice(data.n, size=k, replace=False)].copy()
    if kind == "kmeans_pp":
        return kmeans_pp(data.points, k, rng)
    if kind == "kmeans_result":
        start = data.points[rng.choice(data.n, size=k, replace=False)]
        return lloyd(data.points, start)[0]
    raise ValueError(f"unknown baseline {kind!r}")


def make_kmeans_objective(data: LabeledDataset, split_seed: int = 0) -> ObjectiveSpec:
    return ObjectiveSpec(
        "kmeans_init",
        data.bounding_box(),
        lambda X: kmeans_init_objective(X, data, split_seed),
        0.0,
    )


def make_gmm_objective(data: LabeledDataset, split_seed: int = 0) -> ObjectiveSpec:
    return ObjectiveSpec(
        "gmm_init",
        data.bounding_box(),
        lambda X: gmm_init_objective(X, data, split_seed),
        0.0,
    )
