"""Base kernels on vectors, set kernels and Gram-matrix assembly.

A set is an ``(m, d)`` float array whose rows are the elements.  Row order
carries no meaning: every function here sorts rows into lexicographic order
before summing, which makes results bitwise invariant to how the caller
stored the elements.

The approximate set kernel evaluates the exact set kernel on ``L``-element
subsets picked by a :class:`SubsampleScheme`.  One scheme is drawn per Gram
assembly and reused for every entry and for later cross-covariances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

MATERN52 = "matern52"
SQUARED_EXPONENTIAL = "squared_exponential"
FAMILIES = (MATERN52, SQUARED_EXPONENTIAL)

_SQRT5 = math.sqrt(5.0)
# entries per temporary element-kernel block
_CHUNK = 4_000_000


@dataclass(frozen=True)
class BaseKernelParams:
    """Hyperparameters of the vector kernel inside the set kernel.

    ``lengthscales`` has length ``d`` (ARD) or length 1 (isotropic).
    """

    family: str = MATERN52
    amplitude: float = 1.0
    lengthscales: tuple = (1.0,)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        ls = tuple(float(v) for v in np.atleast_1d(self.lengthscales))
        object.__setattr__(self, "lengthscales", ls)
        object.__setattr__(self, "amplitude", float(self.amplitude))
        if not (self.amplitude > 0 and math.isfinite(self.amplitude)):
            raise ValueError("amplitude must be positive and finite")
        if not ls or not all(v > 0 and math.isfinite(v) for v in ls):
            raise ValueError("lengthscales must be positive and finite")

    @property
    def ard(self) -> bool:
        return len(self.lengthscales) > 1

    def scales(self, d: int) -> np.ndarray:
        ls = np.asarray(self.lengthscales, dtype=float)
        if ls.size == 1:
            return np.full(d, ls[0])
        if ls.size != d:
            raise ValueError(f"{ls.size} lengthscales for dimension {d}")
        return ls


def as_set(X) -> np.ndarray:
    """Validate a set and return it as a 2-D float array."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError(f"a set must be an (m, d) array with m, d >= 1, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("set elements must be finite")
    return X


def canonical_rows(X: np.ndarray) -> np.ndarray:
    """Rows of ``X`` in lexicographic order (coordinate 0 first)."""
    X = np.asarray(X, dtype=float)
    if X.shape[0] <= 1:
        return X.copy()
    order = np.lexsort(X.T[::-1])
    return X[order]


def canonical_rows_batch(S: np.ndarray) -> np.ndarray:
    """:func:`canonical_rows` applied to every set of a ``(p, m, d)`` stack."""
    S = np.asarray(S, dtype=float)
    keys = np.moveaxis(S, 2, 0)[::-1]  # (d, p, m), last key is coordinate 0
    order = np.lexsort(keys, axis=-1)
    return np.take_along_axis(S, order[:, :, None], axis=1)


# ---------------------------------------------------------------------------
# vector kernels
# ---------------------------------------------------------------------------


def _scaled_sq_dist(A, B, ls):
    A = A / ls
    B = B / ls
    r2 = None
    for k in range(A.shape[1]):
        diff = np.subtract.outer(A[:, k], B[:, k])
        diff *= diff
        if r2 is None:
            r2 = diff
        else:
            r2 += diff
    return r2


def pairwise_sq_diffs(flat: np.ndarray) -> np.ndarray:
    """Unscaled per-dimension squared differences, shape ``(d, N, N)``."""
    out = np.empty((flat.shape[1], flat.shape[0], flat.shape[0]))
    for k in range(flat.shape[1]):
        diff = np.subtract.outer(flat[:, k], flat[:, k])
        np.multiply(diff, diff, out=out[k])
    return out


def _profile(r2, family):
    if family == MATERN52:
        s = np.sqrt(r2)
        s *= _SQRT5
        e = np.exp(-s)
        poly = s * s
        poly /= 3.0
        poly += s
        poly += 1.0
        poly *= e
        return poly
    return np.exp(-0.5 * r2)


def element_kernel(A, B, params: BaseKernelParams) -> np.ndarray:
    """Matrix of base-kernel values between rows of ``A`` and rows of ``B``."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    r2 = _scaled_sq_dist(A, B, params.scales(A.shape[1]))
    return params.amplitude**2 * _profile(r2, params.family)


def base_kernel(x, y, params: BaseKernelParams) -> float:
    """k(x, y) for two vectors.

    Matérn 5/2 is ``a² (1 + √5 r + 5r²/3) exp(-√5 r)`` and the squared
    exponential ``a² exp(-r²/2)``, with ``r`` the lengthscale-scaled
    Euclidean distance.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.ndim != 1 or x.shape != y.shape:
        raise ValueError("x and y must be vectors of equal length")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("kernel inputs must be finite")
    return float(element_kernel(x[None, :], y[None, :], params)[0, 0])


# ---------------------------------------------------------------------------
# set kernels
# ---------------------------------------------------------------------------


def set_kernel_exact(X, Y, params: BaseKernelParams) -> float:
    """Mean of the base kernel over all cross pairs of elements."""
    X = canonical_rows(as_set(X))
    Y = canonical_rows(as_set(Y))
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    # fixed argument order keeps k(X, Y) and k(Y, X) bitwise equal
    if (X.shape, X.tobytes()) > (Y.shape, Y.tobytes()):
        X, Y = Y, X
    return float(np.mean(element_kernel(X, Y, params)))


@dataclass(frozen=True)
class SubsampleScheme:
    """Projection direction ``w``, index permutation ``pi`` and subset size ``L``.

    ``pi`` is a 0-based permutation of ``range(m)``.
    """

    w: np.ndarray
    pi: np.ndarray
    L: int

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        pi = np.asarray(self.pi, dtype=np.intp)
        if w.ndim != 1:
            raise ValueError("w must be a vector")
        if pi.ndim != 1 or not np.array_equal(np.sort(pi), np.arange(pi.size)):
            raise ValueError("pi must be a permutation of 0..m-1")
        if not 1 <= int(self.L) <= pi.size:
            raise ValueError(f"L must lie in [1, {pi.size}], got {self.L}")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "L", int(self.L))

    @property
    def m(self) -> int:
        return self.pi.size

    @property
    def d(self) -> int:
        return self.w.size


def draw_scheme(m: int, d: int, L: int, rng: np.random.Generator) -> SubsampleScheme:
    """Draw ``w ~ N(0, I_d)`` and a uniform permutation of ``range(m)``."""
    w = rng.standard_normal(d)
    pi = rng.permutation(m)
    return SubsampleScheme(w=w, pi=pi, L=L)


def order_by_projection(X, w) -> np.ndarray:
    """Indices sorting the rows of ``X`` by ``w @ x``; ties keep row order."""
    X = as_set(X)
    w = np.asarray(w, dtype=float)
    if w.shape != (X.shape[1],):
        raise ValueError(f"w must have length {X.shape[1]}")
    # row-wise reduction so each projection is independent of storage order
    proj = (X * w).sum(axis=1)
    return np.argsort(proj, kind="stable")


def subsample(X, scheme: SubsampleScheme) -> np.ndarray:
    """The ``L`` elements at sorted positions ``pi[0], ..., pi[L-1]``."""
    X = as_set(X)
    if scheme.L > X.shape[0]:
        raise ValueError(f"L={scheme.L} exceeds set cardinality {X.shape[0]}")
    if scheme.m != X.shape[0]:
        raise ValueError(f"scheme built for m={scheme.m}, set has m={X.shape[0]}")
    order = order_by_projection(X, scheme.w)
    return X[order[scheme.pi[: scheme.L]]]


def set_kernel_approx(X, Y, scheme: SubsampleScheme, params: BaseKernelParams) -> float:
    """Exact set kernel between the scheme-selected subsets of ``X`` and ``Y``."""
    return set_kernel_exact(subsample(X, scheme), subsample(Y, scheme), params)


# ---------------------------------------------------------------------------
# Gram assembly
# ---------------------------------------------------------------------------


def stack_sets(sets: Sequence, scheme: SubsampleScheme | None = None) -> np.ndarray:
    """Validate, optionally subsample and canonicalize sets into ``(n, m, d)``."""
    if len(sets) == 0:
        raise ValueError("need at least one set")
    out = []
    shape = None
    for X in sets:
        X = as_set(X)
        if shape is None:
            shape = X.shape
        elif X.shape != shape:
            raise ValueError(f"all sets must share (m, d); got {X.shape} and {shape}")
        if scheme is not None:
            X = subsample(X, scheme)
        out.append(canonical_rows(X))
    return np.stack(out)


def block_kernel(A: np.ndarray, B: np.ndarray, params: BaseKernelParams) -> np.ndarray:
    """Set-kernel matrix between stacks ``A (n1, m1, d)`` and ``B (n2, m2, d)``."""
    n1, m1, d = A.shape
    n2, m2, d2 = B.shape
    if d != d2:
        raise ValueError(f"dimension mismatch: {d} vs {d2}")
    flatB = B.reshape(n2 * m2, d)
    rows = max(1, _CHUNK // max(1, m1 * n2 * m2))
    out = np.empty((n1, n2))
    for start in range(0, n1, rows):
        stop = min(n1, start + rows)
        E = element_kernel(A[start:stop].reshape(-1, d), flatB, params)
        out[start:stop] = _block_mean(E, stop - start, m1, n2, m2)
    return out


def _block_mean(E, n1, m1, n2, m2):
    # two contiguous reductions are much faster than mean(axis=(1, 3))
    inner = E.reshape(n1 * m1, n2, m2).sum(axis=2)
    return inner.reshape(n1, m1, n2).sum(axis=1) / (m1 * m2)


def self_kernel(stack: np.ndarray, params: BaseKernelParams) -> np.ndarray:
    """``k_set(X, X)`` for every set in a stack ``(p, m, d)``."""
    p, m, d = stack.shape
    ls = params.scales(d)
    r2 = np.zeros((p, m, m))
    for k in range(d):
        diff = (stack[:, :, None, k] - stack[:, None, :, k]) / ls[k]
        r2 += diff * diff
    E = params.amplitude**2 * _profile(r2, params.family)
    return E.reshape(p, m * m).mean(axis=1)


def _symmetrize(K):
    # fl(a + b) == fl(b + a), so the result is exactly symmetric
    return 0.5 * (K + K.T)


@dataclass(frozen=True)
class GramMatrix:
    values: np.ndarray
    kind: str
    scheme: SubsampleScheme | None = None


def gram(
    sets: Sequence,
    params: BaseKernelParams,
    L: int | None = None,
    rng: np.random.Generator | None = None,
    scheme: SubsampleScheme | None = None,
) -> GramMatrix:
    """Assemble the set-kernel Gram matrix.

    With ``L=None`` the exact kernel is used.  Otherwise a single
    :class:`SubsampleScheme` is drawn from ``rng`` (or ``scheme`` is reused)
    and applied to every set.
    """
    if len(sets) == 0:
        raise ValueError("need at least one set")
    m, d = as_set(sets[0]).shape
    if L is not None and scheme is None:
        if rng is None:
            raise ValueError("approximate mode needs an rng or a scheme")
        scheme = draw_scheme(m, d, L, rng)
    stack = stack_sets(sets, scheme)
    K = _symmetrize(block_kernel(stack, stack, params))
    return GramMatrix(values=K, kind="exact" if scheme is None else "approximate", scheme=scheme)


def cross_gram(
    train: Sequence,
    query,
    params: BaseKernelParams,
    scheme: SubsampleScheme | None = None,
) -> np.ndarray:
    """Vector of kernel values between each training set and ``query``."""
    A = stack_sets(train, scheme)
    Q = stack_sets([query], scheme)
    if A.shape[2] != Q.shape[2]:
        raise ValueError("dimension mismatch between training sets and query")
    return block_kernel(A, Q, params)[:, 0]


def gram_with_gradients(stack: np.ndarray, params: BaseKernelParams, sq_diffs=None, work=None):
    """Gram matrix of a canonical stack and its derivatives.

    Returns ``(K, dK)`` where ``dK[0]`` is the derivative with respect to
    ``log amplitude²`` and the remaining entries are derivatives with respect
    to each ``log lengthscale`` (one entry when isotropic).  ``sq_diffs``
    may hold :func:`pairwise_sq_diffs` of the flattened stack and ``work``
    a dict of scratch buffers reused across calls.
    """
    n, m, d = stack.shape
    N = n * m
    flat = stack.reshape(N, d)
    ls = params.scales(d)
    a2 = params.amplitude**2
    if work is None:
        work = {}
    if work.get("shape") != (N, N):
        work.clear()
        work["shape"] = (N, N)
        for key in ("r2", "a", "b", "c"):
            work[key] = np.empty((N, N))
    r2, a, b, c = work["r2"], work["a"], work["b"], work["c"]

    if sq_diffs is None:
        for k in range(d):
            diff = np.subtract.outer(flat[:, k], flat[:, k])
            diff /= ls[k]
            if k == 0:
                np.multiply(diff, diff, out=r2)
            else:
                np.multiply(diff, diff, out=c)
                r2 += c
    else:
        np.multiply(sq_diffs[0], 1.0 / ls[0] ** 2, out=r2)
        for k in range(1, d):
            np.multiply(sq_diffs[k], 1.0 / ls[k] ** 2, out=c)
            r2 += c

    def bmean(M):
        return _symmetrize(_block_mean(M, n, m, n, m))

    if params.family == MATERN52:
        # E = a² (1 + s + s²/3) e^{-s},  s = √5 r
        # dE/d(log l_k) = a² (5/3)(1 + s) e^{-s} (Δ_k / l_k)²
        np.sqrt(r2, out=a)
        a *= _SQRT5
        np.negative(a, out=b)
        np.exp(b, out=b)
        b *= a2
        a += 1.0
        a *= b  # a² (1 + s) e^{-s}
        np.multiply(r2, 5.0 / 3.0, out=c)
        c *= b
        c += a
        K = bmean(c)
        a *= 5.0 / 3.0
        G = a
    else:
        np.multiply(r2, -0.5, out=a)
        np.exp(a, out=a)
        a *= a2
        K = bmean(a)
        G = a

    grads = [K.copy()]
    if params.ard:
        for k in range(d):
            if sq_diffs is None:
                diff = np.subtract.outer(flat[:, k], flat[:, k])
                diff *= diff
                diff *= G
                grads.append(bmean(diff) / ls[k] ** 2)
            else:
                np.multiply(G, sq_diffs[k], out=c)
                grads.append(bmean(c) / ls[k] ** 2)
    else:
        np.multiply(G, r2, out=c)
        grads.append(bmean(c))
    return K, grads
