"""The Bayesian-optimization loop over sets and the vector-input baselines.

All strategies minimize.  Randomness is drawn from labeled substreams of
``BoConfig.seed`` so that a run is a pure function of its configuration.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .acquisition import (
    BoxDomain,
    CmaEsConfig,
    UcbSchedule,
    maximize_acquisition,
    rejection_init,
)
from .gp import GpModel, fit, optimize_hyperparameters
from .kernels import MATERN52, BaseKernelParams, as_set, draw_scheme
from .rng import substream

STRATEGIES = ("set_kernel_bo", "vector_baseline", "split_baseline", "random_search")


@dataclass
class BoConfig:
    budget: int = 50
    n_init: int = 5
    L: int | None = None
    strategy: str = "set_kernel_bo"
    ucb: UcbSchedule = field(default_factory=UcbSchedule)
    cma: CmaEsConfig = field(default_factory=CmaEsConfig)
    seed: int = 0
    kernel_family: str = MATERN52
    ard: bool = True
    hyper_restarts: int = 3
    init_noise: float = 1e-3
    scheme_policy: str = "per_fit"

    def __post_init__(self):
        if self.n_init < 1 or self.budget < self.n_init:
            raise ValueError("need 1 <= n_init <= budget")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.L is not None and self.L < 1:
            raise ValueError("L must be positive")
        if self.scheme_policy not in ("per_fit", "fixed"):
            raise ValueError("scheme_policy must be 'per_fit' or 'fixed'")


@dataclass
class RunRecord:
    iteration: int
    acquired_set: np.ndarray
    observed_y: float
    best_so_far: float
    wall_seconds: float
    cumulative_regret: float | None = None
    candidate_index: int | None = None


class BoAborted(RuntimeError):
    """The objective failed; ``history`` holds every completed record."""

    def __init__(self, message: str, history: list[RunRecord]):
        super().__init__(message)
        self.history = history


class _Recorder:
    def __init__(self, known_optimum, callback):
        self.history: list[RunRecord] = []
        self.best = math.inf
        self.regret = 0.0
        self.known_optimum = known_optimum
        self.callback = callback
        self.t0 = time.monotonic()

    def add(self, X, y, index=None):
        self.best = min(self.best, y)
        regret = None
        if self.known_optimum is not None:
            self.regret += y - self.known_optimum
            regret = self.regret
        rec = RunRecord(
            iteration=len(self.history),
            acquired_set=np.array(X, dtype=float),
            observed_y=float(y),
            best_so_far=float(self.best),
            wall_seconds=time.monotonic() - self.t0,
            cumulative_regret=regret,
            candidate_index=index,
        )
        self.history.append(rec)
        if self.callback is not None:
            self.callback(rec)
        return rec


def _evaluate(objective, X, recorder) -> float:
    try:
        y = float(objective.evaluate(X))
    except Exception as exc:
        raise BoAborted(f"objective evaluation failed: {exc}", recorder.history) from exc
    if not math.isfinite(y):
        raise BoAborted(f"objective returned non-finite value {y}", recorder.history)
    return y


def default_kernel_params(domain: BoxDomain, family: str, ard: bool) -> BaseKernelParams:
    ls = 0.25 * domain.width
    return BaseKernelParams(family, 1.0, tuple(ls) if ard else (float(ls.mean()),))


class _Surrogate:
    """Refits a GP each iteration, warm-starting hyperparameters."""

    def __init__(self, domain: BoxDomain, cfg: BoConfig, label):
        self.cfg = cfg
        self.label = label
        self.params = default_kernel_params(domain, cfg.kernel_family, cfg.ard)
        self.noise = cfg.init_noise
        self._fixed_scheme = None

    def _scheme(self, sets, it):
        L = self.cfg.L
        if L is None:
            return None
        m, d = sets.shape[1:]
        if self.cfg.scheme_policy == "fixed":
            if self._fixed_scheme is None:
                self._fixed_scheme = draw_scheme(m, d, L, substream(self.cfg.seed, "scheme", *self.label))
            return self._fixed_scheme
        return draw_scheme(m, d, L, substream(self.cfg.seed, "scheme", *self.label, it))

    def fit(self, sets, ys, it) -> GpModel:
        scheme = self._scheme(sets, it)
        if len(ys) >= 2:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                hp = optimize_hyperparameters(
                    sets,
                    ys,
                    self.params,
                    init_noise=self.noise,
                    L=self.cfg.L,
                    rng=substream(self.cfg.seed, "hyper", *self.label, it),
                    scheme=scheme,
                    n_restarts=self.cfg.hyper_restarts,
                )
            self.params, self.noise = hp.params, hp.noise_variance
        return fit(sets, ys, self.params, self.noise, L=self.cfg.L, scheme=scheme)


def _initial_sets(domain: BoxDomain, cfg: BoConfig) -> np.ndarray:
    return rejection_init(domain, cfg.n_init, substream(cfg.seed, "init"))


def run_bo(objective, cfg: BoConfig, callback: Callable[[RunRecord], None] | None = None) -> list[RunRecord]:
    """Set-kernel BO: random canonical starts, then refit / maximize UCB / evaluate."""
    if cfg.strategy != "set_kernel_bo":
        return STRATEGY_RUNNERS[cfg.strategy](objective, cfg, callback)
    domain = objective.domain
    rec = _Recorder(objective.known_optimum, callback)
    sets, ys = [], []
    for X in _initial_sets(domain, cfg):
        ys.append(_evaluate(objective, X, rec))
        sets.append(X)
        rec.add(X, ys[-1])
    surrogate = _Surrogate(domain, cfg, ("set",))
    for it in range(cfg.n_init, cfg.budget):
        model = surrogate.fit(np.stack(sets), np.array(ys), it)
        beta = cfg.ucb.beta(len(ys), domain.m, domain.d)
        X = maximize_acquisition(model, beta, domain, cfg.cma, substream(cfg.seed, "acq", it))
        y = _evaluate(objective, X, rec)
        sets.append(X)
        ys.append(y)
        rec.add(X, y)
    return rec.history


def flatten_by_norm(X) -> np.ndarray:
    """Rows ordered by ascending Euclidean norm, concatenated into one vector."""
    X = as_set(X)
    order = np.argsort(np.linalg.norm(X, axis=1), kind="stable")
    return X[order].reshape(-1)


def run_vector_baseline(objective, cfg: BoConfig, callback=None) -> list[RunRecord]:
    """Standard BO on the ``m*d`` vector of norm-sorted elements."""
    domain = objective.domain
    m, d = domain.m, domain.d
    vdomain = BoxDomain(np.tile(domain.lower, m), np.tile(domain.upper, m), 1)
    rec = _Recorder(objective.known_optimum, callback)
    vecs, ys = [], []
    for X in _initial_sets(domain, cfg):
        ys.append(_evaluate(objective, X, rec))
        vecs.append(flatten_by_norm(X)[None, :])
        rec.add(X, ys[-1])
    surrogate = _Surrogate(vdomain, cfg, ("vector",))
    for it in range(cfg.n_init, cfg.budget):
        model = surrogate.fit(np.stack(vecs), np.array(ys), it)
        beta = cfg.ucb.beta(len(ys), m, d)
        v = maximize_acquisition(model, beta, vdomain, cfg.cma, substream(cfg.seed, "acq", it))
        X = v.reshape(m, d)
        y = _evaluate(objective, X, rec)
        vecs.append(flatten_by_norm(X)[None, :])
        ys.append(y)
        rec.add(X, y)
    return rec.history


def run_split_baseline(objective, cfg: BoConfig, callback=None) -> list[RunRecord]:
    """``m`` independent ``d``-dimensional GPs, one per norm-sorted slot, all fit to the shared y."""
    domain = objective.domain
    m, d = domain.m, domain.d
    edomain = BoxDomain(domain.lower, domain.upper, 1)
    rec = _Recorder(objective.known_optimum, callback)
    sorted_sets, ys = [], []
    for X in _initial_sets(domain, cfg):
        ys.append(_evaluate(objective, X, rec))
        sorted_sets.append(flatten_by_norm(X).reshape(m, d))
        rec.add(X, ys[-1])
    # with one slot this is the vector baseline, so share its random streams
    labels = [("vector",)] if m == 1 else [("split", i) for i in range(m)]
    surrogates = [_Surrogate(edomain, cfg, label) for label in labels]
    for it in range(cfg.n_init, cfg.budget):
        S = np.stack(sorted_sets)
        beta = cfg.ucb.beta(len(ys), 1, d)
        elements = []
        for i, surrogate in enumerate(surrogates):
            model = surrogate.fit(S[:, i : i + 1, :], np.array(ys), it)
            acq_rng = substream(cfg.seed, "acq", it) if m == 1 else substream(cfg.seed, "acq", it, i)
            x = maximize_acquisition(model, beta, edomain, cfg.cma, acq_rng)
            elements.append(x[0])
        X = np.stack(elements)
        y = _evaluate(objective, X, rec)
        sorted_sets.append(flatten_by_norm(X).reshape(m, d))
        ys.append(y)
        rec.add(X, y)
    return rec.history


def run_random_search(objective, cfg: BoConfig, callback=None) -> list[RunRecord]:
    """``budget`` uniform canonical sets."""
    rec = _Recorder(objective.known_optimum, callback)
    for X in rejection_init(objective.domain, cfg.budget, substream(cfg.seed, "random")):
        rec.add(X, _evaluate(objective, X, rec))
    return rec.history


STRATEGY_RUNNERS = {
    "set_kernel_bo": run_bo,
    "vector_baseline": run_vector_baseline,
    "split_baseline": run_split_baseline,
    "random_search": run_random_search,
}


def run_strategy(objective, cfg: BoConfig, callback=None) -> list[RunRecord]:
    return STRATEGY_RUNNERS[cfg.strategy](objective, cfg, callback)
