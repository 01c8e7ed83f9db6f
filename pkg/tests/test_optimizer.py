import numpy as np
import pytest
from scipy.stats import qmc

from quantbo.optimizer import (
    MultiStartConfig,
    OptimizerError,
    boltzmann_select,
    maximize_penalized,
    sobol_candidates,
)


def test_config_validation():
    with pytest.raises(ValueError):
        MultiStartConfig(n_raw=2, n_starts=3)
    with pytest.raises(ValueError):
        MultiStartConfig(convergence_tol=0.0)


def test_sobol_in_box_and_distinct():
    pts = sobol_candidates(np.array([[0.0, 1.0]]), 4, seed=0)
    assert pts.shape == (4, 1)
    assert np.all((pts >= 0) & (pts <= 1))
    assert len(np.unique(pts)) == 4


def test_sobol_respects_bounds_d7():
    box = np.array([[-3.0, 5.0]] * 7)
    pts = sobol_candidates(box, 100, seed=3)
    assert np.all(pts >= -3) and np.all(pts <= 5)


def test_sobol_deterministic():
    box = np.array([[0.0, 1.0], [2.0, 4.0]])
    a = sobol_candidates(box, 64, seed=9)
    b = sobol_candidates(box, 64, seed=9)
    assert np.array_equal(a, b)


def test_sobol_lower_discrepancy_than_uniform():
    box = np.array([[0.0, 1.0], [0.0, 1.0]])
    sob = sobol_candidates(box, 1024, seed=0)
    uni = np.random.default_rng(0).uniform(0, 1, size=(1024, 2))
    assert qmc.discrepancy(sob, method="L2-star") < qmc.discrepancy(
        uni, method="L2-star"
    )


def test_boltzmann_equal_values_uniform():
    counts = np.zeros(10)
    for s in range(2000):
        idx = boltzmann_select(np.ones(10), 1, eta=1.0, seed=s)
        counts[idx[0]] += 1
    # Multinomial 3-sigma band around 200.
    assert np.all(np.abs(counts - 200) < 3 * np.sqrt(2000 * 0.1 * 0.9))


def test_boltzmann_greedy_limit():
    rng = np.random.default_rng(0)
    values = rng.normal(size=50)
    top3 = set(np.argsort(values)[-3:])
    hits = 0
    for s in range(1000):
        idx = boltzmann_select(values, 3, eta=1e6, seed=s)
        hits += set(idx) == top3
    assert hits / 1000 > 0.99


def test_boltzmann_eta_zero_uniform():
    rng = np.random.default_rng(1)
    values = rng.normal(size=5)
    counts = np.zeros(5)
    trials = 10000
    for s in range(trials):
        counts[boltzmann_select(values, 1, eta=0.0, seed=s)[0]] += 1
    expect = trials / 5
    assert np.all(np.abs(counts - expect) < 3 * np.sqrt(trials * 0.2 * 0.8))


def test_boltzmann_rejects_nan():
    with pytest.raises(ValueError):
        boltzmann_select(np.array([1.0, np.nan]), 1, 1.0, 0)


def _quad_surface(c):
    def surface(x):
        diff = np.asarray(x) - c
        return -float(diff @ diff), -2 * diff

    def batch(X):
        return -np.sum((X - c) ** 2, axis=1)

    return surface, batch


def test_maximize_concave_quadratic():
    c = np.array([0.3, -0.6])
    surface, batch = _quad_surface(c)
    box = np.array([[-1.0, 1.0], [-1.0, 1.0]])
    cfg = MultiStartConfig(n_raw=256, n_starts=3, seed=0)
    x, v = maximize_penalized(surface, box, cfg, surface_batch=batch)
    assert np.linalg.norm(x - c) < 1e-5
    assert v == pytest.approx(0.0, abs=1e-9)


def test_maximize_linear_hits_vertex():
    def surface(x):
        return float(x[0] - 2 * x[1]), np.array([1.0, -2.0])

    box = np.array([[-1.0, 2.0], [-3.0, 4.0]])
    cfg = MultiStartConfig(n_raw=128, n_starts=2, seed=1)
    x, v = maximize_penalized(surface, box, cfg)
    assert x[0] == pytest.approx(2.0, abs=1e-8)
    assert x[1] == pytest.approx(-3.0, abs=1e-8)


def test_maximize_bimodal_vs_grid_oracle():
    def f(x):
        return np.sin(5 * x) + 0.5 * np.sin(13 * x) + 0.3 * x

    def df(x):
        return 5 * np.cos(5 * x) + 6.5 * np.cos(13 * x) + 0.3

    grid = np.linspace(0, 2, 2000001)
    x_star = grid[np.argmax(f(grid))]
    box = np.array([[0.0, 2.0]])
    hits = 0
    for seed in range(10):
        cfg = MultiStartConfig(n_raw=512, n_starts=3, seed=seed)
        x, _ = maximize_penalized(
            lambda x: (float(f(x[0])), np.array([df(x[0])])),
            box,
            cfg,
            surface_batch=lambda X: f(X[:, 0]),
        )
        hits += abs(x[0] - x_star) < 1e-4
    assert hits >= 9


def test_maximize_stays_in_box_and_deterministic():
    surface, batch = _quad_surface(np.array([5.0, 5.0]))
    box = np.array([[0.0, 1.0], [0.0, 1.0]])
    cfg = MultiStartConfig(n_raw=64, n_starts=2, seed=7)
    x1, v1 = maximize_penalized(surface, box, cfg, surface_batch=batch)
    x2, v2 = maximize_penalized(surface, box, cfg, surface_batch=batch)
    assert np.array_equal(x1, x2) and v1 == v2
    assert np.all(x1 >= 0) and np.all(x1 <= 1)


def test_maximize_never_worse_than_selected_starts():
    rng_surface_calls = []

    def surface(x):
        v = -np.sum((np.asarray(x) - 0.5) ** 2)
        rng_surface_calls.append(1)
        return float(v), -2 * (np.asarray(x) - 0.5)

    box = np.array([[0.0, 1.0]])
    cfg = MultiStartConfig(n_raw=32, n_starts=4, seed=2)
    cands = sobol_candidates(box, 32, 2)
    start_vals = [surface(c)[0] for c in cands]
    _, v = maximize_penalized(surface, box, cfg)
    assert v >= max(start_vals) - 1e-9


def test_all_starts_fail_raises():
    def surface(x):
        if len(surface.calls) < 1000:
            surface.calls.append(1)
        raise FloatingPointError("boom")

    surface.calls = []
    box = np.array([[0.0, 1.0]])
    cfg = MultiStartConfig(n_raw=8, n_starts=2, seed=0)
    with pytest.raises((OptimizerError, FloatingPointError)):
        maximize_penalized(surface, box, cfg, surface_batch=lambda X: np.zeros(len(X)))
