import numpy as np
import pytest

from setbo.cmaes import cmaes_minimize, default_popsize


def sphere(X):
    return np.sum((X - 0.3) ** 2, axis=1)


def rosenbrock(X):
    return np.sum(100.0 * (X[:, 1:] - X[:, :-1] ** 2) ** 2 + (1 - X[:, :-1]) ** 2, axis=1)


def test_default_population():
    assert default_popsize(1) == 4
    assert default_popsize(20) == 4 + int(np.floor(3 * np.log(20)))


def test_sphere_converges(rng):
    res = cmaes_minimize(sphere, np.zeros(5), 0.5, rng, max_iters=300)
    assert res.f < 1e-10
    assert np.allclose(res.x, 0.3, atol=1e-5)


def test_rosenbrock_converges(rng):
    res = cmaes_minimize(rosenbrock, np.array([-1.0, 1.5]), 0.5, rng, max_iters=1000)
    assert np.allclose(res.x, 1.0, atol=1e-4)


def test_same_generator_state_reproduces_run():
    a = cmaes_minimize(sphere, np.ones(3), 0.3, np.random.default_rng(7), max_iters=50)
    b = cmaes_minimize(sphere, np.ones(3), 0.3, np.random.default_rng(7), max_iters=50)
    assert np.array_equal(a.x, b.x) and a.f == b.f and a.n_evals == b.n_evals


def test_evaluation_budget(rng):
    res = cmaes_minimize(sphere, np.zeros(4), 0.3, rng, popsize=6, max_iters=10, tol_x=0, tol_fun=0)
    assert res.n_iters == 10 and res.n_evals == 60


def test_repair_applied_before_evaluation(rng):
    seen = []

    def f(X):
        seen.append(X.copy())
        return np.sum((X - 2.0) ** 2, axis=1)

    res = cmaes_minimize(f, np.zeros(2), 0.5, rng, max_iters=60, repair=lambda X: np.clip(X, 0.0, 1.0))
    assert all(np.all((X >= 0) & (X <= 1)) for X in seen)
    assert np.allclose(res.x, 1.0, atol=1e-6)


def test_function_tolerance_stops_on_plateau(rng):
    res = cmaes_minimize(lambda X: np.zeros(len(X)), np.zeros(3), 0.3, rng, max_iters=500)
    assert res.n_iters < 500
