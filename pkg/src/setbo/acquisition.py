"""GP-UCB and its maximization over the set domain.

The search space for an ``m``-element set in ``R^d`` is the box ``[lower,
upper]^m`` viewed as an ``m*d`` vector.  Every permutation class has exactly
one representative with rows in lexicographic order (the canonical region);
the constrained optimizer only ever evaluates and recombines such
representatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .cmaes import cmaes_minimize, default_popsize
from .gp import GpModel
from .kernels import as_set, canonical_rows, canonical_rows_batch


@dataclass(frozen=True)
class UcbSchedule:
    """``constant``: beta is fixed.  ``log``: beta_n = sqrt(c m d log(2(n+1)))."""

    form: str = "log"
    value: float = 0.2

    def __post_init__(self):
        if self.form not in ("constant", "log"):
            raise ValueError(f"unknown UCB schedule {self.form!r}")
        if self.value < 0:
            raise ValueError("schedule parameter must be nonnegative")

    def beta(self, n: int, m: int, d: int) -> float:
        if self.form == "constant":
            return float(self.value)
        return math.sqrt(self.value * m * d * math.log(2.0 * (n + 1)))


@dataclass(frozen=True)
class BoxDomain:
    lower: np.ndarray
    upper: np.ndarray
    m: int

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1 or not np.all(lo < hi):
            raise ValueError("need lower < upper componentwise")
        if int(self.m) < 1:
            raise ValueError("m must be positive")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "m", int(self.m))

    @property
    def d(self) -> int:
        return self.lower.size

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def clip(self, X) -> np.ndarray:
        return np.clip(X, self.lower, self.upper)

    def contains(self, X) -> bool:
        X = np.asarray(X)
        return bool(np.all(X >= self.lower) and np.all(X <= self.upper))

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """``count`` uniform sets, shape ``(count, m, d)``."""
        u = rng.random((count, self.m, self.d))
        return self.lower + u * self.width

    def to_unit(self, X) -> np.ndarray:
        return ((np.asarray(X) - self.lower) / self.width).reshape(-1)

    def from_unit(self, u) -> np.ndarray:
        return self.lower + np.asarray(u).reshape(-1, self.m, self.d) * self.width


@dataclass
class CmaEsConfig:
    population: int | None = None
    sigma0: float = 0.3
    max_iters: int = 100
    n_init_candidates: int = 5
    restarts: int = 2

    def __post_init__(self):
        if self.population is not None and self.population < 4:
            raise ValueError("population must be at least 4")
        if self.sigma0 <= 0 or self.max_iters < 1:
            raise ValueError("sigma0 and max_iters must be positive")
        if self.n_init_candidates < 1 or self.restarts < 1:
            raise ValueError("n_init_candidates and restarts must be positive")

    def popsize(self, dim: int) -> int:
        return self.population or default_popsize(dim)


def ucb_batch(model: GpModel, queries, beta: float) -> np.ndarray:
    mean, var = model.predict_batch(queries)
    return -mean + beta * np.sqrt(var)


def ucb(model: GpModel, query, beta: float) -> float:
    """``-mean + beta * std`` of the posterior at ``query``."""
    return float(ucb_batch(model, as_set(query)[None], beta)[0])


def canonicalize(X) -> np.ndarray:
    """Sort rows lexicographically; the canonical representative of ``X``."""
    return canonical_rows(as_set(X))


def canonicalize_batch(S) -> np.ndarray:
    """:func:`canonicalize` for every set of a ``(p, m, d)`` stack."""
    return canonical_rows_batch(S)


def in_canonical_region(X) -> bool:
    X = as_set(X)
    return bool(np.array_equal(X, canonical_rows(X)))


def rejection_init(domain: BoxDomain, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` sets uniform on the canonical region, shape ``(count, m, d)``.

    Sorting a uniform draw gives the same distribution as rejecting
    non-canonical draws, without wasting ``m! - 1`` of every ``m!`` samples.
    """
    if count < 1:
        raise ValueError("count must be positive")
    return canonical_rows_batch(domain.sample(rng, count))


def rejection_sample(domain: BoxDomain, count: int, rng: np.random.Generator, max_draws: int = 10**7):
    """Naive rejection sampling; returns ``(sets, accepted_fraction)``.

    Uniform sets are drawn in batches and kept when already canonical.  The
    fraction is accepted draws over total draws, about ``1/m!`` for ``d = 1``.
    """
    accepted = []
    n_accepted = draws = 0
    batch = max(1024, 4 * count)
    while n_accepted < count and draws < max_draws:
        S = domain.sample(rng, min(batch, max_draws - draws))
        keep = np.all(S == canonical_rows_batch(S), axis=(1, 2))
        draws += len(S)
        if n_accepted + int(keep.sum()) >= count:
            # stop at the draw that completes the request
            idx = np.flatnonzero(keep)[count - n_accepted - 1]
            draws -= len(S) - idx - 1
            keep[idx + 1 :] = False
        accepted.append(S[keep])
        n_accepted += int(keep.sum())
    if n_accepted < count:
        raise RuntimeError(f"only {n_accepted} of {count} samples accepted in {draws} draws")
    return np.concatenate(accepted), n_accepted / draws


@dataclass
class AcquisitionSearch:
    best: np.ndarray
    value: float
    init_sets: np.ndarray
    init_values: np.ndarray
    n_evals: int = 0
    n_init_samples: int = 0
    n_canonicalized: int = 0
    run_values: list = field(default_factory=list)


def optimize_acquisition(
    acq_batch: Callable[[np.ndarray], np.ndarray],
    domain: BoxDomain,
    cfg: CmaEsConfig,
    rng: np.random.Generator,
    constrained: bool = True,
) -> AcquisitionSearch:
    """Maximize ``acq_batch`` (maps ``(p, m, d)`` to ``(p,)``) over the box.

    Constrained: starts are canonical and every CMA-ES candidate is clamped
    and canonicalized before evaluation and recombination.  Unconstrained:
    starts are raw uniform draws and candidates are only clamped.
    """
    m, d = domain.m, domain.d
    counter = {"canon": 0}

    if constrained:
        init = rejection_init(domain, cfg.n_init_candidates, rng)
    else:
        init = domain.sample(rng, cfg.n_init_candidates)
    init_values = np.asarray(acq_batch(init), dtype=float)
    n_evals = len(init)

    def repair(U):
        U = np.clip(U, 0.0, 1.0)
        if constrained:
            counter["canon"] += len(U)
            U = canonicalize_batch(U.reshape(-1, m, d)).reshape(len(U), -1)
        return U

    def f_batch(U):
        return -np.asarray(acq_batch(domain.from_unit(U)), dtype=float)

    ranked = np.argsort(-init_values, kind="stable")
    best_idx = int(ranked[0])
    best, best_val = init[best_idx], float(init_values[best_idx])
    run_values = []
    for r in range(cfg.restarts):
        start = init[ranked[r % len(init)]]
        res = cmaes_minimize(
            f_batch,
            domain.to_unit(start),
            cfg.sigma0,
            rng,
            popsize=cfg.popsize(m * d),
            max_iters=cfg.max_iters,
            repair=repair,
        )
        n_evals += res.n_evals
        run_values.append(-res.f)
        if -res.f > best_val:
            best_val = -res.f
            best = domain.from_unit(res.x)[0]
    if constrained:
        best = canonical_rows(best)
    return AcquisitionSearch(
        best=domain.clip(best),
        value=best_val,
        init_sets=init,
        init_values=init_values,
        n_evals=n_evals,
        n_init_samples=len(init),
        n_canonicalized=counter["canon"],
        run_values=run_values,
    )


def maximize_acquisition(
    model: GpModel,
    beta: float,
    domain: BoxDomain,
    cfg: CmaEsConfig,
    rng: np.random.Generator,
    constrained: bool = True,
) -> np.ndarray:
    """The set maximizing GP-UCB found by (constrained) CMA-ES."""
    search = optimize_acquisition(lambda Q: ucb_batch(model, Q, beta), domain, cfg, rng, constrained)
    return search.best
