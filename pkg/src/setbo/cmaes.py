"""A small (mu/mu_w, lambda)-CMA-ES for bounded acquisition search.

Candidates may be passed through a batch ``repair`` map before evaluation.
The strategy update uses the raw samples while the reported optimum is the
best repaired point.  Feeding repaired points back into recombination drags
the mean away from optima on the region boundary (sorting ties spreads them
apart), so repair is kept out of the update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass
class CmaResult:
    x: np.ndarray
    f: float
    n_evals: int
    n_iters: int


def default_popsize(n: int) -> int:
    return 4 + int(math.floor(3.0 * math.log(n)))


def cmaes_minimize(
    f_batch: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    sigma0: float,
    rng: np.random.Generator,
    popsize: int | None = None,
    max_iters: int = 100,
    repair: Callable[[np.ndarray], np.ndarray] | None = None,
    tol_x: float = 1e-12,
    tol_fun: float = 1e-12,
) -> CmaResult:
    """Minimize ``f_batch`` (maps ``(lam, n)`` to ``(lam,)``) from ``x0``.

    ``repair`` maps a ``(lam, n)`` batch to a batch of feasible points.
    Stops after ``max_iters`` generations, when the step size falls below
    ``tol_x``, or when the recent best values and the current population
    all lie within ``tol_fun``.
    """
    mean = np.asarray(x0, dtype=float).copy()
    n = mean.size
    lam = popsize or default_popsize(n)
    mu = lam // 2
    weights = np.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
    weights /= weights.sum()
    mueff = 1.0 / np.sum(weights**2)

    cc = (4 + mueff / n) / (n + 4 + 2 * mueff / n)
    cs = (mueff + 2) / (n + mueff + 5)
    c1 = 2 / ((n + 1.3) ** 2 + mueff)
    cmu = min(1 - c1, 2 * (mueff - 2 + 1 / mueff) / ((n + 2) ** 2 + mueff))
    damps = 1 + 2 * max(0.0, math.sqrt((mueff - 1) / (n + 1)) - 1) + cs
    chi_n = math.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n * n))

    sigma = float(sigma0)
    C = np.eye(n)
    B = np.eye(n)
    D = np.ones(n)
    pc = np.zeros(n)
    ps = np.zeros(n)

    history_len = 10 + int(math.ceil(30 * n / lam))
    recent_best: list[float] = []

    best_x, best_f = mean.copy(), math.inf
    n_evals = 0
    it = 0
    for it in range(1, max_iters + 1):
        z = rng.standard_normal((lam, n))
        y = (z * D) @ B.T
        x = mean + sigma * y
        if repair is not None:
            x = np.asarray(repair(x), dtype=float)
        fx = np.asarray(f_batch(x), dtype=float)
        n_evals += lam
        order = np.argsort(fx, kind="stable")
        if fx[order[0]] < best_f:
            best_f = float(fx[order[0]])
            best_x = x[order[0]].copy()

        y_sel = y[order[:mu]]
        y_w = weights @ y_sel
        mean = mean + sigma * y_w

        c_inv_sqrt_yw = B @ ((B.T @ y_w) / D)
        ps = (1 - cs) * ps + math.sqrt(cs * (2 - cs) * mueff) * c_inv_sqrt_yw
        ps_norm = np.linalg.norm(ps)
        hsig = ps_norm / math.sqrt(1 - (1 - cs) ** (2 * it)) / chi_n < 1.4 + 2 / (n + 1)
        pc = (1 - cc) * pc + hsig * math.sqrt(cc * (2 - cc) * mueff) * y_w

        rank_mu = (y_sel.T * weights) @ y_sel
        C = (
            (1 - c1 - cmu) * C
            + c1 * (np.outer(pc, pc) + (1 - hsig) * cc * (2 - cc) * C)
            + cmu * rank_mu
        )
        sigma *= math.exp((cs / damps) * (ps_norm / chi_n - 1))

        C = np.triu(C) + np.triu(C, 1).T
        evals, B = np.linalg.eigh(C)
        D = np.sqrt(np.maximum(evals, 1e-30))

        if sigma * D.max() < tol_x or not np.isfinite(sigma):
            break
        recent_best.append(float(fx[order[0]]))
        if len(recent_best) >= history_len:
            window = recent_best[-history_len:]
            spread = max(max(window), fx.max()) - min(min(window), fx.min())
            if spread < tol_fun:
                break
    return CmaResult(x=best_x, f=best_f, n_evals=n_evals, n_iters=it)
