"""Gaussian-process regression over sets.

Training sets are stored as a canonical ``(n, m, d)`` stack (subsampled
first when a :class:`~setbo.kernels.SubsampleScheme` is in use), so the
approximate kernel is simply the exact kernel on ``L``-element sets.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize

from .kernels import (
    BaseKernelParams,
    SubsampleScheme,
    as_set,
    block_kernel,
    draw_scheme,
    gram_with_gradients,
    pairwise_sq_diffs,
    self_kernel,
    stack_sets,
)

_LOG_2PI = math.log(2.0 * math.pi)
JITTER_START = 1e-10
JITTER_MAX = 1e-4
# entries of the cached per-dimension distance tensor used during hyperparameter search
_SQ_DIFF_CACHE_LIMIT = 12_000_000


class NumericalError(RuntimeError):
    """Cholesky factorization failed even at the largest jitter."""

    def __init__(self, message: str, jitter: float):
        super().__init__(message)
        self.jitter = jitter


@dataclass(frozen=True)
class Posterior:
    mean: float
    variance: float


@dataclass
class GpModel:
    train_sets: np.ndarray
    targets: np.ndarray
    kernel_params: BaseKernelParams
    noise_variance: float
    L: int | None
    scheme: SubsampleScheme | None
    chol: np.ndarray
    alpha: np.ndarray
    jitter: float
    y_mean: float = 0.0
    y_scale: float = 1.0
    stack: np.ndarray = field(repr=False, default=None)

    @property
    def n(self) -> int:
        return self.train_sets.shape[0]

    @property
    def scaled_targets(self) -> np.ndarray:
        return (self.targets - self.y_mean) / self.y_scale

    def _query_stack(self, queries) -> np.ndarray:
        Q = np.asarray(queries, dtype=float)
        if Q.ndim == 2:
            Q = Q[None]
        if Q.shape[1:] != self.train_sets.shape[1:]:
            raise ValueError(
                f"query shape {Q.shape[1:]} does not match training sets {self.train_sets.shape[1:]}"
            )
        return stack_sets(list(Q), self.scheme)

    def predict_batch(self, queries, clamp: bool = True):
        """Posterior mean and variance for a batch ``(p, m, d)`` of sets."""
        Q = self._query_stack(queries)
        Ks = block_kernel(self.stack, Q, self.kernel_params)  # (n, p)
        kss = self_kernel(Q, self.kernel_params)
        mean = Ks.T @ self.alpha
        v = solve_triangular(self.chol, Ks, lower=True)
        var = kss - np.sum(v * v, axis=0)
        if clamp:
            var = np.maximum(var, 0.0)
        return mean * self.y_scale + self.y_mean, var * self.y_scale**2

    def predict(self, query) -> Posterior:
        mean, var = self.predict_batch(as_set(query)[None])
        return Posterior(mean=float(mean[0]), variance=float(var[0]))


def _factor(K: np.ndarray, noise: float):
    base = float(np.mean(np.diag(K))) + noise
    scale = base if base > 0 else 1.0
    jitter = JITTER_START * scale
    n = K.shape[0]
    while True:
        try:
            C = cholesky(K + (noise + jitter) * np.eye(n), lower=True, check_finite=False)
            if np.all(np.isfinite(C)):
                return C, jitter
        except np.linalg.LinAlgError:
            pass
        if jitter >= JITTER_MAX * scale * (1 - 1e-12):
            raise NumericalError(f"Cholesky failed with jitter {jitter:.3g}", jitter)
        jitter *= 10.0


def _standardize(y, normalize_y):
    if not normalize_y:
        return 0.0, 1.0
    mu = float(np.mean(y))
    sd = float(np.std(y))
    return mu, (sd if sd > 0 else 1.0)


def fit(
    train_sets,
    targets,
    kernel_params: BaseKernelParams,
    noise_variance: float,
    L: int | None = None,
    rng: np.random.Generator | None = None,
    scheme: SubsampleScheme | None = None,
    normalize_y: bool = True,
) -> GpModel:
    """Condition a set-kernel GP on ``(train_sets, targets)``.

    ``L=None`` uses the exact kernel.  Otherwise a fresh scheme is drawn
    from ``rng`` unless one is passed in.  ``noise_variance`` is on the
    standardized target scale when ``normalize_y`` is true.
    """
    sets = np.stack([as_set(X) for X in train_sets]) if len(train_sets) else None
    y = np.asarray(targets, dtype=float).ravel()
    if sets is None or sets.shape[0] != y.size:
        raise ValueError("need n >= 1 training sets and one target per set")
    if not np.all(np.isfinite(y)):
        raise ValueError("targets must be finite")
    if noise_variance < 0:
        raise ValueError("noise_variance must be nonnegative")
    if L is not None and scheme is None:
        if rng is None:
            raise ValueError("approximate mode needs an rng or a scheme")
        scheme = draw_scheme(sets.shape[1], sets.shape[2], L, rng)
    stack = stack_sets(list(sets), scheme)
    K = block_kernel(stack, stack, kernel_params)
    K = np.triu(K) + np.triu(K, 1).T
    y_mean, y_scale = _standardize(y, normalize_y)
    C, jitter = _factor(K, noise_variance)
    alpha = cho_solve((C, True), (y - y_mean) / y_scale, check_finite=False)
    return GpModel(
        train_sets=sets,
        targets=y,
        kernel_params=kernel_params,
        noise_variance=float(noise_variance),
        L=L,
        scheme=scheme,
        chol=C,
        alpha=alpha,
        jitter=jitter,
        y_mean=y_mean,
        y_scale=y_scale,
        stack=stack,
    )


def predict(model: GpModel, query) -> Posterior:
    return model.predict(query)


def log_marginal_likelihood(model: GpModel) -> float:
    """Gaussian log evidence of the (standardized) targets."""
    y = model.scaled_targets
    return float(
        -0.5 * y @ model.alpha - np.sum(np.log(np.diag(model.chol))) - 0.5 * model.n * _LOG_2PI
    )


# ---------------------------------------------------------------------------
# hyperparameters
# ---------------------------------------------------------------------------


def _pack(params: BaseKernelParams, noise: float) -> np.ndarray:
    return np.log(np.r_[params.amplitude**2, params.lengthscales, noise])


def _unpack(theta, family) -> tuple[BaseKernelParams, float]:
    v = np.exp(theta)
    return BaseKernelParams(family, math.sqrt(v[0]), tuple(v[1:-1])), float(v[-1])


def lml_and_gradient(theta, stack, y, family, sq_diffs=None, work=None):
    """Log marginal likelihood and its gradient in log-parameter space.

    ``theta = log([amplitude², *lengthscales, noise])``.  Raises
    ``np.linalg.LinAlgError`` when the covariance is not positive definite.
    """
    params, noise = _unpack(theta, family)
    K, dK = gram_with_gradients(stack, params, sq_diffs, work)
    n = K.shape[0]
    Ky = K + noise * np.eye(n)
    C = cholesky(Ky, lower=True, check_finite=False)
    alpha = cho_solve((C, True), y, check_finite=False)
    lml = -0.5 * y @ alpha - np.sum(np.log(np.diag(C))) - 0.5 * n * _LOG_2PI
    W = np.outer(alpha, alpha) - cho_solve((C, True), np.eye(n), check_finite=False)
    grad = [0.5 * np.sum(W * D) for D in dK]
    grad.append(0.5 * noise * np.trace(W))
    return float(lml), np.asarray(grad)


@dataclass
class HyperparameterFit:
    params: BaseKernelParams
    noise_variance: float
    lml: float
    init_lml: float
    improved: bool


def hyperparameter_bounds(sets: np.ndarray, n_ls: int, target_var: float = 1.0):
    flat = sets.reshape(-1, sets.shape[-1])
    rng_ = np.ptp(flat, axis=0)
    rng_ = np.where(rng_ > 0, rng_, 1.0)
    if n_ls == 1:
        rng_ = np.array([float(np.mean(rng_))])
    lo = np.log(np.r_[1e-6 * target_var, 1e-3 * rng_, 1e-8 * target_var])
    hi = np.log(np.r_[1e6 * target_var, 1e3 * rng_, 1.0 * target_var])
    return lo, hi, rng_


def optimize_hyperparameters(
    train_sets,
    targets,
    init: BaseKernelParams,
    init_noise: float = 1e-2,
    L: int | None = None,
    rng: np.random.Generator | None = None,
    scheme: SubsampleScheme | None = None,
    normalize_y: bool = True,
    n_restarts: int = 3,
    maxiter: int = 200,
) -> HyperparameterFit:
    """Maximize the marginal likelihood with L-BFGS-B in log space.

    Starts from ``init`` plus ``n_restarts`` random points.  The result is
    never worse than ``init``; when no start improves on it, ``init`` is
    returned with ``improved=False`` and a warning.
    """
    sets = np.stack([as_set(X) for X in train_sets])
    y = np.asarray(targets, dtype=float).ravel()
    if sets.shape[0] < 2:
        raise ValueError("hyperparameter optimization needs n >= 2")
    rng = rng if rng is not None else np.random.default_rng(0)
    if L is not None and scheme is None:
        scheme = draw_scheme(sets.shape[1], sets.shape[2], L, rng)
    stack = stack_sets(list(sets), scheme)
    y_mean, y_scale = _standardize(y, normalize_y)
    ys = (y - y_mean) / y_scale
    target_var = 1.0 if normalize_y else max(float(np.var(y)), 1e-12)

    n_ls = len(init.lengthscales)
    lo, hi, ranges = hyperparameter_bounds(sets, n_ls, target_var)
    theta0 = np.clip(_pack(init, init_noise), lo, hi)

    flat = stack.reshape(-1, stack.shape[-1])
    sq_diffs = None
    if flat.shape[0] ** 2 * flat.shape[1] <= _SQ_DIFF_CACHE_LIMIT:
        sq_diffs = pairwise_sq_diffs(flat)
    work: dict = {}

    def objective(theta):
        try:
            val, grad = lml_and_gradient(theta, stack, ys, init.family, sq_diffs, work)
        except (np.linalg.LinAlgError, ValueError):
            return 1e25, np.zeros_like(theta)
        if not np.isfinite(val):
            return 1e25, np.zeros_like(theta)
        return -val, -grad

    init_val = -objective(theta0)[0]
    starts = [theta0]
    for _ in range(n_restarts):
        starts.append(
            np.log(
                np.r_[
                    rng.uniform(0.1, 10.0) * target_var,
                    ranges * np.exp(rng.uniform(np.log(0.05), np.log(2.0), size=n_ls)),
                    np.exp(rng.uniform(np.log(1e-6), np.log(1e-1))) * target_var,
                ]
            )
        )
    best_theta, best_val = theta0, init_val
    for start in starts:
        res = minimize(
            objective,
            np.clip(start, lo, hi),
            jac=True,
            method="L-BFGS-B",
            bounds=list(zip(lo, hi)),
            options={"maxiter": maxiter, "ftol": 1e-9},
        )
        val = -float(res.fun)
        if np.isfinite(val) and val > best_val:
            best_theta, best_val = res.x, val
    improved = best_val > init_val
    if not improved:
        warnings.warn("hyperparameter optimization did not improve on init", RuntimeWarning)
        return HyperparameterFit(init, float(init_noise), init_val, init_val, False)
    params, noise = _unpack(best_theta, init.family)
    return HyperparameterFit(params, noise, best_val, init_val, True)
