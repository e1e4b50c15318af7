"""Point clouds, Chamfer distance and active nearest-neighbor search."""

from __future__ import annotations

import math
import warnings

import numpy as np

from ..acquisition import ucb_batch
from ..gp import fit, optimize_hyperparameters
from ..kernels import MATERN52, BaseKernelParams, draw_scheme
from ..rng import substream

SHAPES = ("sphere", "box", "plane", "cylinder")


def as_cloud(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != 3 or X.shape[0] < 1:
        raise ValueError(f"a point cloud must be an (m, 3) array, got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("point coordinates must be finite")
    return X


def chamfer(X, Y, symmetric: bool = False) -> float:
    """Sum over points of ``X`` of the distance to the nearest point of ``Y``.

    ``symmetric=True`` adds the reverse direction.
    """
    X, Y = as_cloud(X), as_cloud(Y)
    if X.shape[0] != Y.shape[0]:
        raise ValueError("point clouds must have equal cardinality")
    D = np.sqrt(((X[:, None, :] - Y[None, :, :]) ** 2).sum(axis=2))
    value = float(D.min(axis=1).sum())
    if symmetric:
        value += float(D.min(axis=0).sum())
    return value


def read_xyz(path) -> np.ndarray:
    return as_cloud(np.loadtxt(path, ndmin=2))


def write_xyz(path, cloud) -> None:
    np.savetxt(path, as_cloud(cloud), fmt="%.17g")


def _surface_points(shape: str, m: int, rng: np.random.Generator) -> np.ndarray:
    if shape == "sphere":
        v = rng.standard_normal((m, 3))
        return v / np.linalg.norm(v, axis=1, keepdims=True)
    if shape == "box":
        p = rng.uniform(-1, 1, (m, 3))
        axis = rng.integers(3, size=m)
        p[np.arange(m), axis] = rng.choice([-1.0, 1.0], size=m)
        return p
    if shape == "plane":
        p = rng.uniform(-1, 1, (m, 3))
        p[:, 2] = 0.0
        return p
    if shape == "cylinder":
        t = rng.uniform(0, 2 * math.pi, m)
        return np.c_[np.cos(t), np.sin(t), rng.uniform(-1, 1, m)]
    raise ValueError(f"unknown shape {shape!r}")


def random_cloud(rng: np.random.Generator, m: int = 64, noise: float = 0.02) -> np.ndarray:
    """A noisy sample of a randomly scaled and shifted primitive surface."""
    shape = SHAPES[int(rng.integers(len(SHAPES)))]
    p = _surface_points(shape, m, rng)
    p = p * rng.uniform(0.5, 1.5, size=3) + rng.normal(0.0, 0.3, size=3)
    return p + noise * rng.standard_normal((m, 3))


def make_point_cloud_pool(n: int, m: int = 64, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """``n`` synthetic clouds and one query cloud from the same generator."""
    rng = substream(seed, "pointclouds")
    pool = np.stack([random_cloud(rng, m) for _ in range(n)])
    query = random_cloud(rng, m)
    return pool, query


def linear_scan(query, pool) -> tuple[int, float]:
    dists = [chamfer(query, P) for P in pool]
    idx = int(np.argmin(dists))
    return idx, float(dists[idx])


def active_nn_search(query, pool, budget: int, cfg):
    """Find the pool member closest to ``query`` in Chamfer distance with BO.

    A set-kernel GP is fitted to the Chamfer values observed so far; the
    next candidate is the unevaluated member with the largest GP-UCB.
    Returns ``(index, history)`` where ``index`` has the lowest observed
    distance and ``history`` is a list of :class:`~setbo.boloop.RunRecord`.
    """
    from ..boloop import RunRecord

    query = as_cloud(query)
    pool = np.stack([as_cloud(P) for P in pool])
    n_pool, m, d = pool.shape
    if not 1 <= budget <= n_pool:
        raise ValueError("budget must lie in [1, pool size]")

    flat = pool.reshape(-1, d)
    width = np.ptp(flat, axis=0)
    params = BaseKernelParams(MATERN52, 1.0, tuple(0.25 * width) if cfg.ard else (float(0.25 * width.mean()),))
    noise = cfg.init_noise

    evaluated: list[int] = []
    ys: list[float] = []
    history: list[RunRecord] = []
    best = math.inf

    def observe(idx):
        nonlocal best
        y = chamfer(query, pool[idx])
        evaluated.append(idx)
        ys.append(y)
        best = min(best, y)
        history.append(
            RunRecord(
                iteration=len(history),
                acquired_set=pool[idx],
                observed_y=y,
                best_so_far=best,
                wall_seconds=0.0,
                candidate_index=idx,
            )
        )

    n_init = min(cfg.n_init, budget)
    for idx in substream(cfg.seed, "nn-init").choice(n_pool, size=n_init, replace=False):
        observe(int(idx))

    while len(evaluated) < budget:
        it = len(evaluated)
        scheme = None
        if cfg.L is not None:
            scheme = draw_scheme(m, d, cfg.L, substream(cfg.seed, "scheme", it))
        sets = pool[evaluated]
        y = np.array(ys)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            hp = optimize_hyperparameters(
                sets, y, params, init_noise=noise, L=cfg.L, scheme=scheme,
                rng=substream(cfg.seed, "hyper", it), n_restarts=cfg.hyper_restarts,
            )
        params, noise = hp.params, hp.noise_variance
        model = fit(sets, y, params, noise, L=cfg.L, scheme=scheme)
        remaining = np.setdiff1d(np.arange(n_pool), evaluated)
        beta = cfg.ucb.beta(len(ys), 1, 1)
        scores = ucb_batch(model, pool[remaining], beta)
        observe(int(remaining[int(np.argmax(scores))]))

    best_idx = evaluated[int(np.argmin(ys))]
    return best_idx, history
