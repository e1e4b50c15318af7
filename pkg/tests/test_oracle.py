import math

import numpy as np
import pytest
from sklearn.metrics import adjusted_rand_score

from setbo.kernels import MATERN52, SQUARED_EXPONENTIAL, BaseKernelParams, set_kernel_exact
from setbo.objectives import chamfer
from setbo.oracle import (
    SubsetEnumeration,
    exhaustive_mean_kernel,
    exhaustive_variance_kernel,
    lemma2_identity_check,
    naive_ari,
    naive_base_kernel,
    naive_chamfer,
    naive_set_kernel,
)

MATERN = BaseKernelParams(MATERN52, 1.0, (0.8, 1.2, 1.0))


def test_subset_enumeration_size_and_order():
    for m in range(1, 7):
        for L in range(1, m + 1):
            enum = SubsetEnumeration.build(m, L)
            assert len(enum) == math.comb(m, L)
            assert all(list(s) == sorted(set(s)) and len(s) == L for s in enum.subsets)


def test_subset_enumeration_rejects_bad_L():
    with pytest.raises(ValueError):
        SubsetEnumeration.build(3, 0)
    with pytest.raises(ValueError):
        SubsetEnumeration.build(3, 4)


def test_mean_over_full_subsets_is_exact(rng):
    X, Y = rng.standard_normal((4, 3)), rng.standard_normal((4, 3))
    assert exhaustive_mean_kernel(X, Y, 4, MATERN) == pytest.approx(set_kernel_exact(X, Y, MATERN), rel=1e-13)


def test_mean_for_singletons_by_hand():
    # X = Y = {0, 1, 2}, SE kernel: (3 + 4 e^{-1/2} + 2 e^{-2}) / 9
    p = BaseKernelParams(SQUARED_EXPONENTIAL, 1.0, (1.0,))
    X = [[0.0], [1.0], [2.0]]
    expected = (3 + 4 * math.exp(-0.5) + 2 * math.exp(-2.0)) / 9
    assert exhaustive_mean_kernel(X, X, 1, p) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("L", [1, 2, 3])
def test_mean_over_subsets_is_unbiased(rng, L):
    for _ in range(5):
        X, Y = rng.standard_normal((4, 3)), rng.standard_normal((4, 3))
        assert exhaustive_mean_kernel(X, Y, L, MATERN) == pytest.approx(
            set_kernel_exact(X, Y, MATERN), rel=1e-10
        )


def test_variance_zero_at_full_subset(rng):
    X, Y = rng.standard_normal((4, 3)), rng.standard_normal((4, 3))
    assert exhaustive_variance_kernel(X, Y, 4, MATERN) == 0.0


def test_variance_bound(rng):
    m, L = 4, 2
    for _ in range(10):
        X, Y = rng.standard_normal((m, 3)), rng.standard_normal((m, 3))
        k = set_kernel_exact(X, Y, MATERN)
        assert exhaustive_variance_kernel(X, Y, L, MATERN) <= (m**4 / L**4 - 1) * k * k + 1e-10


def test_variance_shrinks_with_L(rng):
    for _ in range(20):
        X, Y = rng.standard_normal((4, 3)), rng.standard_normal((4, 3))
        assert exhaustive_variance_kernel(X, Y, 1, MATERN) >= exhaustive_variance_kernel(X, Y, 3, MATERN)


@pytest.mark.parametrize("m,L", [(4, 2), (5, 3), (5, 5), (3, 1)])
def test_subset_counting_identity(rng, m, L):
    X, Y = rng.standard_normal((m, 2)), rng.standard_normal((m, 2))
    assert lemma2_identity_check(X, Y, L, BaseKernelParams(MATERN52, 1.0, (1.0,)))


def test_guard_refuses_large_enumerations(rng):
    X = rng.standard_normal((30, 1))
    with pytest.raises(ValueError, match="guard"):
        exhaustive_mean_kernel(X, X, 15, MATERN)
    with pytest.raises(ValueError):
        exhaustive_variance_kernel(X[:4], X[:5], 2, MATERN)


def test_oracles_ignore_element_order(rng):
    X, Y = rng.standard_normal((4, 3)), rng.standard_normal((4, 3))
    P = X[rng.permutation(4)]
    assert exhaustive_mean_kernel(X, Y, 2, MATERN) == pytest.approx(exhaustive_mean_kernel(P, Y, 2, MATERN), rel=1e-14)
    assert exhaustive_variance_kernel(X, Y, 2, MATERN) == pytest.approx(
        exhaustive_variance_kernel(P, Y, 2, MATERN), rel=1e-10
    )


def test_naive_kernel_agrees_with_closed_form():
    p = BaseKernelParams(MATERN52, 2.0, (1.0,))
    r = 1.0
    expected = 4.0 * (1 + math.sqrt(5) + 5 / 3) * math.exp(-math.sqrt(5))
    assert naive_base_kernel([0.0], [r], p) == pytest.approx(expected, rel=1e-14)
    assert naive_set_kernel([[0.0]], [[r]], p) == pytest.approx(expected, rel=1e-14)


def test_chamfer_matches_nested_loop(rng):
    for _ in range(10):
        X, Y = rng.standard_normal((10, 3)), rng.standard_normal((10, 3))
        assert chamfer(X, Y) == pytest.approx(naive_chamfer(X, Y), rel=1e-12)


def test_naive_ari_agrees_with_library(rng):
    for _ in range(20):
        a, b = rng.integers(0, 4, 30), rng.integers(0, 3, 30)
        assert naive_ari(a, b) == pytest.approx(adjusted_rand_score(a, b), abs=1e-12)
    assert naive_ari([0, 0, 1, 1], [5, 5, 2, 2]) == 1.0
