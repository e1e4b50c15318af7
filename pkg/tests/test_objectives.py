import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from setbo.acquisition import BoxDomain, CmaEsConfig, UcbSchedule
from setbo.boloop import BoConfig
from setbo.objectives import (
    LabeledDataset,
    active_nn_search,
    adjusted_rand_index,
    baseline_inits,
    build_objective,
    chamfer,
    converged_residual,
    gmm_init_objective,
    kmeans_init_objective,
    linear_scan,
    load_dataset_csv,
    lloyd,
    make_gaussian_mixture,
    make_point_cloud_pool,
    read_xyz,
    synthetic1,
    synthetic2,
    write_xyz,
)
from setbo.objectives.synthetic import SYNTHETIC2_MODES, synthetic1_minimum, synthetic2_minimum
from setbo.oracle import naive_chamfer


@pytest.fixture(scope="module")
def mixture():
    return make_gaussian_mixture(n=500, d=5, k=10, seed=0)


# ---------------------------------------------------------------------------
# synthetic functions
# ---------------------------------------------------------------------------


def test_synthetic1_examples():
    assert synthetic1(np.zeros((5, 1))) == 0.0
    r = 3 * math.pi / 4
    assert synthetic1([[r]]) == pytest.approx(-1 + 0.05 * r, abs=1e-12)
    assert synthetic1([[-r]]) == synthetic1([[r]])
    assert synthetic1([[0.0], [r]]) == pytest.approx((-1 + 0.05 * r) / 2, abs=1e-12)


def test_synthetic1_minimum_matches_grid_search():
    grid = np.linspace(0, 10, 1_000_001)
    vals = np.sin(2 * grid) + 0.05 * grid
    r, v = synthetic1_minimum()
    assert v == pytest.approx(vals.min(), abs=1e-3)
    assert r == pytest.approx(grid[np.argmin(vals)], abs=1e-3)
    # slightly below g(3 pi / 4) because the penalty shifts the optimum inward
    assert v < synthetic1([[3 * math.pi / 4]])


def test_synthetic2_examples():
    cross = 7 * math.exp(-0.5 * 16) / (2 * math.pi)
    assert abs(synthetic2([[6.0, 0.0]]) + 1 / (2 * math.pi)) <= cross
    assert abs(synthetic2([[10.0, 10.0]])) <= 1e-6
    assert synthetic2([[6.0, 0.0], [10.0, 10.0]]) == pytest.approx(synthetic2([[6.0, 0.0]]) / 2, abs=1e-7)


def test_synthetic2_minimum_matches_grid_search():
    g = np.linspace(-10, 10, 2001)
    xx, yy = np.meshgrid(g, g, indexing="ij")
    vals = np.zeros_like(xx)
    for mu in SYNTHETIC2_MODES:
        vals -= np.exp(-0.5 * ((xx - mu[0]) ** 2 + (yy - mu[1]) ** 2)) / (2 * math.pi)
    _, v = synthetic2_minimum()
    assert v == pytest.approx(vals.min(), abs=1e-3)
    assert v <= vals.min()


def test_synthetic_dimension_checks():
    with pytest.raises(ValueError):
        synthetic1(np.zeros((3, 2)))
    with pytest.raises(ValueError):
        synthetic2(np.zeros((3, 1)))


# ---------------------------------------------------------------------------
# registry and permutation invariance
# ---------------------------------------------------------------------------

REGISTERED = [
    ("synthetic1", {"m": 6}),
    ("synthetic2", {"m": 6}),
    ("kmeans_init", {"dataset": {"n": 120, "d": 2, "k": 4, "seed": 1}}),
    ("gmm_init", {"dataset": {"n": 120, "d": 2, "k": 4, "seed": 1}}),
]


@pytest.mark.parametrize("name,params", REGISTERED)
def test_registered_objectives_ignore_element_order(rng, name, params):
    obj = build_objective(name, **params)
    X = obj.domain.sample(rng, 1)[0]
    ref = obj(X)
    for _ in range(50):
        assert obj(X[rng.permutation(obj.m)]) == pytest.approx(ref, abs=1e-12)


def test_registry_rejects_unknowns():
    with pytest.raises(ValueError, match="unknown objective"):
        build_objective("nope")
    with pytest.raises(ValueError, match="unknown parameters"):
        build_objective("synthetic1", m=3, d=4)
    with pytest.raises(ValueError, match="unknown dataset keys"):
        build_objective("kmeans_init", dataset={"bogus": 1})
    with pytest.raises(ValueError, match="k_clusters"):
        build_objective("kmeans_init", dataset={"path": "x.csv"})


def test_registry_loads_csv_dataset(tmp_path):
    path = tmp_path / "data.csv"
    path.write_text("a,b,label\n0,0,0\n0.1,0,0\n5,5,1\n5.1,5,1\n0,0.1,0\n5,5.1,1\n")
    obj = build_objective("kmeans_init", dataset={"path": str(path), "k_clusters": 2, "label_column": "label"})
    assert (obj.m, obj.d) == (2, 2)
    data = load_dataset_csv(path, 2, "label")
    assert data.labels.tolist() == [0, 0, 1, 1, 0, 1]
    with pytest.raises(ValueError, match="no column"):
        load_dataset_csv(path, 2, "missing")


# ---------------------------------------------------------------------------
# ARI
# ---------------------------------------------------------------------------


@given(arrays(np.int64, 20, elements=st.integers(0, 3)), arrays(np.int64, 20, elements=st.integers(0, 3)))
def test_ari_axioms(a, b):
    assert adjusted_rand_index(a, a) == 1.0
    assert adjusted_rand_index(a, b) == pytest.approx(adjusted_rand_index(b, a), abs=1e-12)
    assert adjusted_rand_index(a, (a + 1) % 4) == 1.0


def test_ari_of_independent_labelings_centers_on_zero(rng):
    vals = [adjusted_rand_index(rng.integers(0, 5, 100), rng.integers(0, 5, 100)) for _ in range(1000)]
    assert abs(np.mean(vals)) <= 0.02


# ---------------------------------------------------------------------------
# clustering objectives
# ---------------------------------------------------------------------------


def test_dataset_validation():
    with pytest.raises(ValueError):
        LabeledDataset(np.zeros((2, 2)), None, 3)
    with pytest.raises(ValueError):
        LabeledDataset(np.zeros((2, 2)), np.array([0, -1]), 1)
    with pytest.raises(ValueError):
        LabeledDataset(np.array([[np.nan, 0.0]]), None, 1)


def test_kmeans_true_centers_score_well(mixture):
    data, centers = mixture
    assert kmeans_init_objective(centers, data) <= 0.05


def test_gmm_true_means_score_well(mixture):
    data, centers = mixture
    assert gmm_init_objective(centers, data) <= 0.1


def test_single_cluster_objectives_are_zero(rng):
    data = LabeledDataset(0.01 * rng.standard_normal((50, 3)), np.zeros(50, dtype=int), 1)
    X = data.points[:1]
    assert kmeans_init_objective(X, data) == 0.0
    assert gmm_init_objective(X, data) == 0.0


def test_clustering_objectives_check_shape(mixture):
    data, centers = mixture
    with pytest.raises(ValueError):
        kmeans_init_objective(centers[:3], data)
    with pytest.raises(ValueError):
        gmm_init_objective(centers[:, :2], data)
    unlabeled = LabeledDataset(data.points, None, data.k_clusters)
    with pytest.raises(ValueError):
        kmeans_init_objective(centers, unlabeled)


def test_objective_range(mixture, rng):
    data, _ = mixture
    for _ in range(5):
        X = data.bounding_box().sample(rng, 1)[0]
        assert 0.0 <= kmeans_init_objective(X, data) <= 2.0


def test_lloyd_reseeds_empty_cluster():
    points = np.array([[0.0], [0.1], [10.0], [10.1]])
    C, labels = lloyd(points, np.array([[0.0], [100.0]]))
    assert len(set(labels.tolist())) == 2
    assert sorted(C[:, 0].round(6).tolist()) == [0.05, 10.05]


def test_converged_residual_single_point():
    data = LabeledDataset(np.array([[1.5, -2.0]]), None, 1)
    assert converged_residual([[1.5, -2.0]], data) == 0.0


def test_converged_residual_two_points_by_hand():
    a = 1.3
    data = LabeledDataset(np.array([[0.0], [a]]), None, 2)
    w = math.exp(-a * a) / (1 + math.exp(-a * a))
    assert converged_residual([[a], [0.0]], data) == pytest.approx(2 * w * a * a, rel=1e-12)


def test_converged_residual_ignores_element_order(mixture, rng):
    data, centers = mixture
    ref = converged_residual(centers, data)
    assert ref >= 0
    for _ in range(5):
        assert converged_residual(centers[rng.permutation(10)], data) == ref


# ---------------------------------------------------------------------------
# initialization baselines
# ---------------------------------------------------------------------------


def test_baseline_examples(mixture, rng):
    data, _ = mixture
    rows = {tuple(p) for p in data.points}
    assert all(tuple(c) in rows for c in baseline_inits(data, "data_sample", rng))
    box = data.bounding_box()
    assert box.contains(baseline_inits(data, "random_box", rng))
    assert baseline_inits(data, "kmeans_result", rng).shape == (10, 5)
    with pytest.raises(ValueError):
        baseline_inits(data, "farthest", rng)


def test_kmeans_pp_with_k_equal_n_returns_all_points(rng):
    pts = rng.standard_normal((6, 2))
    data = LabeledDataset(pts, None, 6)
    got = baseline_inits(data, "kmeans_pp", rng)
    assert sorted(map(tuple, got)) == sorted(map(tuple, pts))


def test_kmeans_pp_beats_data_sample_on_average():
    data, _ = make_gaussian_mixture(n=200, d=2, k=5, seed=3, spread=10.0, std=0.5)
    rng = np.random.default_rng(0)
    score = {kind: np.mean([kmeans_init_objective(baseline_inits(data, kind, rng), data) for _ in range(1000)])
             for kind in ("kmeans_pp", "data_sample")}
    assert score["kmeans_pp"] <= score["data_sample"]


# ---------------------------------------------------------------------------
# point clouds
# ---------------------------------------------------------------------------


def test_chamfer_axioms_and_examples(rng):
    X = rng.standard_normal((8, 3))
    assert chamfer(X, X) == 0.0
    assert chamfer([[0, 0, 0]], [[3, 4, 0]]) == 5.0
    for _ in range(10):
        Y = rng.standard_normal((8, 3))
        assert chamfer(X, Y) >= 0
        assert chamfer(X, Y, symmetric=True) == pytest.approx(chamfer(X, Y) + chamfer(Y, X))


def test_chamfer_matches_nested_loop_oracle(rng):
    X, Y = rng.standard_normal((10, 3)), rng.standard_normal((10, 3))
    assert chamfer(X, Y) == pytest.approx(naive_chamfer(X, Y), rel=1e-12)


def test_chamfer_requires_equal_cardinality(rng):
    with pytest.raises(ValueError):
        chamfer(rng.standard_normal((3, 3)), rng.standard_normal((4, 3)))
    with pytest.raises(ValueError):
        chamfer(rng.standard_normal((3, 2)), rng.standard_normal((3, 2)))


def test_xyz_round_trip(tmp_path, rng):
    X = rng.standard_normal((16, 3))
    write_xyz(tmp_path / "c.xyz", X)
    assert np.array_equal(read_xyz(tmp_path / "c.xyz"), X)


def _nn_cfg(seed):
    return BoConfig(budget=12, n_init=4, seed=seed, ucb=UcbSchedule(), cma=CmaEsConfig())


def test_nn_search_exhaustive_budget_finds_linear_scan_answer():
    pool, query = make_point_cloud_pool(12, m=16, seed=2)
    idx, hist = active_nn_search(query, pool, 12, _nn_cfg(0))
    assert idx == linear_scan(query, pool)[0]
    assert len(hist) == 12 and len({r.candidate_index for r in hist}) == 12


def test_nn_search_finds_exact_copy():
    pool, _ = make_point_cloud_pool(12, m=16, seed=4)
    query = pool[7].copy()
    idx, hist = active_nn_search(query, pool, 12, _nn_cfg(1))
    assert idx == 7 and hist[-1].best_so_far == 0.0


def test_nn_search_budget_validation():
    pool, query = make_point_cloud_pool(4, m=8, seed=0)
    with pytest.raises(ValueError):
        active_nn_search(query, pool, 5, _nn_cfg(0))


def test_synthetic_domains():
    d1, d2 = build_objective("synthetic1", m=2).domain, build_objective("synthetic2", m=3).domain
    assert isinstance(d1, BoxDomain) and (d1.m, d1.d) == (2, 1) and (d2.m, d2.d) == (3, 2)
    assert np.array_equal(d1.lower, [-10.0]) and np.array_equal(d2.upper, [10.0, 10.0])
