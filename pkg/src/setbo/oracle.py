"""Brute-force reference implementations for property tests.

Nothing here imports the production kernels: base kernels, set kernels,
Chamfer distance and ARI are re-derived with plain loops so that agreement
with the vectorized code is meaningful.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .kernels import BaseKernelParams

MAX_PAIR_EVALUATIONS = 10**6


def naive_base_kernel(x, y, params: BaseKernelParams) -> float:
    d = len(x)
    ls = params.lengthscales if len(params.lengthscales) == d else params.lengthscales * d
    r2 = 0.0
    for a, b, l in zip(x, y, ls):
        r2 += ((float(a) - float(b)) / l) ** 2
    a2 = params.amplitude**2
    if params.family == "matern52":
        r = math.sqrt(r2)
        return a2 * (1.0 + math.sqrt(5.0) * r + 5.0 * r2 / 3.0) * math.exp(-math.sqrt(5.0) * r)
    return a2 * math.exp(-0.5 * r2)


def naive_set_kernel(X, Y, params: BaseKernelParams) -> float:
    total = math.fsum(naive_base_kernel(x, y, params) for x in X for y in Y)
    return total / (len(X) * len(Y))


def _pair_matrix(X, Y, params):
    return [[naive_base_kernel(x, y, params) for y in Y] for x in X]


@dataclass(frozen=True)
class SubsetEnumeration:
    m: int
    L: int
    subsets: tuple

    @classmethod
    def build(cls, m: int, L: int) -> "SubsetEnumeration":
        if not 1 <= L <= m:
            raise ValueError("need 1 <= L <= m")
        return cls(m, L, tuple(itertools.combinations(range(m), L)))

    def __len__(self):
        return len(self.subsets)


def _guard(m: int, L: int) -> None:
    pairs = math.comb(m, L) ** 2
    if pairs > MAX_PAIR_EVALUATIONS:
        raise ValueError(f"C({m},{L})^2 = {pairs} subset pairs exceeds the oracle guard")


def _subset_pair_values(X, Y, L, params):
    m = len(X)
    if len(Y) != m:
        raise ValueError("X and Y must have the same cardinality")
    _guard(m, L)
    K = _pair_matrix(X, Y, params)
    subsets = SubsetEnumeration.build(m, L).subsets
    values = []
    for sx in subsets:
        for sy in subsets:
            values.append(math.fsum(K[a][b] for a in sx for b in sy) / (L * L))
    return values


def exhaustive_mean_kernel(X, Y, L: int, params: BaseKernelParams) -> float:
    """Mean of the exact set kernel over all pairs of ``L``-subsets."""
    values = _subset_pair_values(X, Y, L, params)
    return math.fsum(values) / len(values)


def exhaustive_variance_kernel(X, Y, L: int, params: BaseKernelParams) -> float:
    """Population variance of the exact set kernel over all pairs of ``L``-subsets."""
    values = _subset_pair_values(X, Y, L, params)
    mean = math.fsum(values) / len(values)
    return math.fsum((v - mean) ** 2 for v in values) / len(values)


def lemma2_identity_check(X, Y, L: int, params: BaseKernelParams, rtol: float = 1e-9) -> bool:
    """Check the subset-counting identity by summing both sides directly.

    Summing every element pair over every pair of ``L``-subsets equals
    ``L² C(m,L)² / m²`` times the sum over all element pairs.
    """
    m = len(X)
    _guard(m, L)
    K = _pair_matrix(X, Y, params)
    subsets = SubsetEnumeration.build(m, L).subsets
    lhs = math.fsum(K[a][b] for sx in subsets for sy in subsets for a in sx for b in sy)
    full = math.fsum(K[c][e] for c in range(m) for e in range(m))
    rhs = L * L * math.comb(m, L) ** 2 / (m * m) * full
    return math.isclose(lhs, rhs, rel_tol=rtol, abs_tol=0.0)


def naive_chamfer(X, Y) -> float:
    total = 0.0
    for x in X:
        best = math.inf
        for y in Y:
            dist = math.sqrt(sum((float(a) - float(b)) ** 2 for a, b in zip(x, y)))
            best = min(best, dist)
        total += best
    return total


def naive_ari(labels_a, labels_b) -> float:
    """Adjusted Rand index by explicit pair counting."""
    n = len(labels_a)
    pairs = list(itertools.combinations(range(n), 2))
    same_a = [labels_a[i] == labels_a[j] for i, j in pairs]
    same_b = [labels_b[i] == labels_b[j] for i, j in pairs]
    index = sum(a and b for a, b in zip(same_a, same_b))
    sum_a = sum(same_a)
    sum_b = sum(same_b)
    total = len(pairs)
    expected = sum_a * sum_b / total
    max_index = 0.5 * (sum_a + sum_b)
    if max_index == expected:
        return 1.0
    return (index - expected) / (max_index - expected)
