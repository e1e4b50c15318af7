"""Synthetic set objectives of the form ``f(X) = mean_i g(x_i)``."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from ..acquisition import BoxDomain
from ..kernels import as_set
from .base import ObjectiveSpec

SYNTHETIC_BOUND = 10.0
# eight unit-covariance modes: four inner corners and four outer axis points
SYNTHETIC2_MODES = np.array(
    [[2, 2], [2, -2], [-2, 2], [-2, -2], [6, 0], [-6, 0], [0, 6], [0, -6]], dtype=float
)


def g_periodic(x) -> float:
    r = float(np.linalg.norm(x))
    return math.sin(2.0 * r) + abs(0.05 * r)


def g_mixture(x) -> float:
    x = np.asarray(x, dtype=float)
    sq = np.sum((SYNTHETIC2_MODES - x) ** 2, axis=1)
    return -math.fsum(np.exp(-0.5 * sq) / (2.0 * math.pi))


def synthetic1(X) -> float:
    """Mean of ``sin(2|x|) + |0.05 |x||`` over the elements (``d = 1``)."""
    X = as_set(X)
    if X.shape[1] != 1:
        raise ValueError("synthetic1 is defined for d = 1")
    # fsum is exactly rounded, hence independent of element order
    return math.fsum(g_periodic(x) for x in X) / X.shape[0]


def synthetic2(X) -> float:
    """Mean over elements of the negated 8-mode Gaussian density (``d = 2``)."""
    X = as_set(X)
    if X.shape[1] != 2:
        raise ValueError("synthetic2 is defined for d = 2")
    return math.fsum(g_mixture(x) for x in X) / X.shape[0]


@lru_cache(maxsize=None)
def synthetic1_minimum() -> tuple[float, float]:
    """``(radius, value)`` of the global minimum of the periodic element function."""
    res = minimize_scalar(
        lambda r: math.sin(2 * r) + 0.05 * r, bounds=(2.0, 2.8), method="bounded",
        options={"xatol": 1e-12},
    )
    return float(res.x), float(res.fun)


@lru_cache(maxsize=None)
def synthetic2_minimum() -> tuple[tuple[float, float], float]:
    best = None
    for mu in SYNTHETIC2_MODES:
        res = minimize(g_mixture, mu, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-14})
        if best is None or res.fun < best[1]:
            best = (tuple(float(v) for v in res.x), float(res.fun))
    return best


def make_synthetic1(m: int = 20) -> ObjectiveSpec:
    domain = BoxDomain([-SYNTHETIC_BOUND], [SYNTHETIC_BOUND], m)
    return ObjectiveSpec("synthetic1", domain, synthetic1, synthetic1_minimum()[1])


def make_synthetic2(m: int = 20) -> ObjectiveSpec:
    domain = BoxDomain([-SYNTHETIC_BOUND] * 2, [SYNTHETIC_BOUND] * 2, m)
    return ObjectiveSpec("synthetic2", domain, synthetic2, synthetic2_minimum()[1])
