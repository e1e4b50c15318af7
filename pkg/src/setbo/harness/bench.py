"""Micro-benchmarks: subsampled-kernel accuracy/cost and constrained acquisition search."""

from __future__ import annotations

import statistics
import time
import warnings

import numpy as np

from ..acquisition import CmaEsConfig, UcbSchedule, optimize_acquisition, rejection_init, ucb_batch
from ..boloop import default_kernel_params
from ..gp import fit, optimize_hyperparameters
from ..kernels import MATERN52, BaseKernelParams, draw_scheme, set_kernel_approx, set_kernel_exact
from ..objectives import make_synthetic1
from ..rng import substream

KERNEL_BENCH_COLUMNS = (
    "L",
    "repeats",
    "kernel_mean",
    "kernel_std",
    "seconds_mean",
    "seconds_std",
    "exact_value",
)
AFO_BENCH_COLUMNS = (
    "m",
    "seed",
    "acq_constrained",
    "acq_unconstrained",
    "f_constrained",
    "f_unconstrained",
    "init_samples_constrained",
    "init_samples_unconstrained",
    "canonicalized_constrained",
    "canonicalized_unconstrained",
)


def _std(values) -> float:
    return statistics.pstdev(values) if len(values) > 1 else 0.0


def kernel_bench(
    m: int,
    d: int,
    Ls,
    repeats: int,
    seed: int = 0,
    params: BaseKernelParams | None = None,
    timer=time.perf_counter,
) -> list[tuple]:
    """Subsampled set-kernel value and wall time for each ``L``.

    Two independent sets of ``m`` standard-normal elements are compared, so
    the reference value is the exact kernel between them.  Each repeat draws
    a fresh scheme; the timed region covers the draw and the evaluation.
    """
    params = params or BaseKernelParams(MATERN52, 1.0, (1.0,))
    data = substream(seed, "kernel-bench", "data")
    X = data.standard_normal((m, d))
    Y = data.standard_normal((m, d))
    exact = set_kernel_exact(X, Y, params)
    rows = []
    for L in Ls:
        if not 1 <= L <= m:
            raise ValueError(f"L={L} outside [1, {m}]")
        rng = substream(seed, "kernel-bench", "scheme", L)
        values, seconds = [], []
        for _ in range(repeats):
            t0 = timer()
            scheme = draw_scheme(m, d, L, rng)
            values.append(set_kernel_approx(X, Y, scheme, params))
            seconds.append(timer() - t0)
        rows.append(
            (
                int(L),
                int(repeats),
                float(statistics.fmean(values)),
                float(_std(values)),
                float(statistics.fmean(seconds)),
                float(_std(seconds)),
                float(exact),
            )
        )
    return rows


def afo_cell(m: int, seed: int, n_obs: int = 20, cma: CmaEsConfig | None = None) -> tuple:
    """Constrained vs unconstrained UCB search on Synthetic 1 with fixed observations.

    Both searches get the same initial-sample count and CMA-ES settings and
    start from identically seeded generators.
    """
    cma = cma or CmaEsConfig()
    objective = make_synthetic1(m)
    domain = objective.domain
    sets = rejection_init(domain, n_obs, substream(seed, "afo", m, "obs"))
    ys = np.array([objective(X) for X in sets])
    params = default_kernel_params(domain, MATERN52, True)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        hp = optimize_hyperparameters(sets, ys, params, init_noise=1e-3, rng=substream(seed, "afo", m, "hyper"))
    model = fit(sets, ys, hp.params, hp.noise_variance)

    beta = UcbSchedule().beta(n_obs, m, domain.d)

    def acq(Q):
        return ucb_batch(model, Q, beta)

    results = {}
    for constrained in (True, False):
        search = optimize_acquisition(acq, domain, cma, substream(seed, "afo", m, "search"), constrained)
        results[constrained] = (search, objective(search.best))
    (sc, fc), (su, fu) = results[True], results[False]
    return (
        int(m),
        int(seed),
        float(sc.value),
        float(su.value),
        float(fc),
        float(fu),
        sc.n_init_samples,
        su.n_init_samples,
        sc.n_canonicalized,
        su.n_canonicalized,
    )


def afo_bench(ms, seeds, n_obs: int = 20, cma: CmaEsConfig | None = None) -> list[tuple]:
    return [afo_cell(m, seed, n_obs, cma) for m in ms for seed in seeds]
