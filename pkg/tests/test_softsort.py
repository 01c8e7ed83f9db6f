import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from quantbo.softsort import (
    QuantileResult,
    empirical_quantile,
    empirical_quantile_batch,
    hard_sort,
    soft_sort,
    soft_sort_values_batch,
)


def test_hard_sort_basic():
    res = hard_sort([3.0, 1.0, 2.0])
    assert np.array_equal(res.values, [1.0, 2.0, 3.0])
    assert np.array_equal(res.permutation, [1, 2, 0])


def test_hard_sort_sorted_input_identity_permutation():
    res = hard_sort([1.0, 2.0, 3.0])
    assert np.array_equal(res.permutation, [0, 1, 2])


def test_hard_sort_ties_stable():
    res = hard_sort([5.0, 5.0, 5.0])
    assert np.array_equal(res.permutation, [0, 1, 2])


def test_hard_sort_rejects_nan():
    with pytest.raises(ValueError):
        hard_sort([1.0, np.nan])


def test_soft_sort_rejects_nonpositive_epsilon():
    with pytest.raises(ValueError):
        soft_sort([1.0, 2.0], 0.0)
    with pytest.raises(ValueError):
        soft_sort([1.0, 2.0], -1.0)


def test_soft_sort_small_epsilon_matches_hard():
    res = soft_sort([3.0, 1.0, 2.0], 1e-6)
    assert np.max(np.abs(res.values - [1.0, 2.0, 3.0])) < 1e-4


def test_soft_sort_singleton():
    for eps in (1e-4, 0.1, 10.0):
        res = soft_sort([7.0], eps)
        assert res.values[0] == pytest.approx(7.0, abs=1e-12)


def test_soft_sort_large_epsilon_pools_toward_mean():
    v = np.array([0.0, 10.0])
    res = soft_sort(v, 1000.0)
    # Pooling threshold is 1/eps; a gap of 10 >> 1/eps forces one pool.
    # Pooled outputs differ by exactly the rho/eps gap of 1/eps.
    assert res.values[0] == pytest.approx(res.values[1] - 1 / 1000.0, rel=1e-9)
    assert res.values.sum() == pytest.approx(10.0, abs=1e-9)


def _qp_projection_oracle(v, eps):
    """Brute-force projection of rho/eps onto P(v) over all permutations."""
    import cvxpy as cp

    L = len(v)
    rho = np.arange(L, 0, -1) / eps
    y = cp.Variable(L)
    vs_desc = np.sort(v)[::-1]
    prefix = np.cumsum(vs_desc)
    cons = [cp.sum(y) == v.sum()]
    for k in range(1, L):
        cons.append(cp.sum_largest(y, k) <= prefix[k - 1])
    prob = cp.Problem(cp.Minimize(cp.sum_squares(y - rho)), cons)
    prob.solve(solver=cp.CLARABEL)
    return y.value


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("eps", [0.3, 1.0, 5.0])
def test_soft_sort_matches_qp_projection(seed, eps):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=5)
    # The descending regularized sort is by definition the projection of
    # rho/eps onto P(v); the ascending version is its sign-flipped twin.
    desc = -soft_sort(-v, eps).values
    proj = _qp_projection_oracle(v, eps)
    assert np.allclose(desc, proj, atol=1e-5)
    asc = soft_sort(v, eps).values
    proj_neg = _qp_projection_oracle(-v, eps)
    assert np.allclose(asc, -proj_neg, atol=1e-5)


@pytest.mark.parametrize("seed", range(10))
def test_jvp_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    L, eps = 32, 0.1
    v = rng.normal(size=L)
    t = rng.normal(size=L)
    res = soft_sort(v, eps)
    jvp = res.jvp(t)
    h = 1e-6
    fd = (soft_sort(v + h * t, eps).values - soft_sort(v - h * t, eps).values) / (2 * h)
    assert np.linalg.norm(jvp - fd) / max(np.linalg.norm(fd), 1e-12) < 1e-5


@pytest.mark.parametrize("seed", range(5))
def test_vjp_is_jvp_transpose(seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=16)
    res = soft_sort(v, 2.0)
    t = rng.normal(size=16)
    g = rng.normal(size=16)
    assert np.dot(g, res.jvp(t)) == pytest.approx(np.dot(res.vjp(g), t), rel=1e-10)


@settings(max_examples=100, deadline=None)
@given(
    arrays(np.float64, st.integers(1, 40),
           elements=st.floats(-50, 50, allow_nan=False)),
    st.sampled_from([1e-4, 0.1, 1.0, 10.0]),
)
def test_projection_feasibility(v, eps):
    res = soft_sort(v, eps)
    assert res.values.sum() == pytest.approx(v.sum(), abs=1e-8 * (1 + abs(v).sum()))
    out_desc = np.sort(res.values)[::-1]
    in_desc = np.sort(v)[::-1]
    slack = 1e-8 * (1 + np.abs(v).sum())
    assert np.all(np.cumsum(out_desc) <= np.cumsum(in_desc) + slack)


@settings(max_examples=50, deadline=None)
@given(
    arrays(np.float64, st.integers(2, 20),
           elements=st.floats(-10, 10, allow_nan=False)),
    st.randoms(use_true_random=False),
)
def test_permutation_equivariance(v, rnd):
    idx = list(range(len(v)))
    rnd.shuffle(idx)
    a = soft_sort(v, 0.5).values
    b = soft_sort(v[np.array(idx)], 0.5).values
    assert np.allclose(a, b, atol=1e-10)


def test_monotone_convergence_to_hard_sort():
    rng = np.random.default_rng(7)
    grid = [1.0, 0.5, 0.1, 0.01, 1e-4]
    for _ in range(20):
        v = rng.normal(size=24) * 3
        hard = hard_sort(v).values
        dists = [np.max(np.abs(soft_sort(v, e).values - hard)) for e in grid]
        # Slack covers roundoff from the large rho/eps offsets at small eps.
        for a, b in zip(dists, dists[1:]):
            assert b <= a + 1e-9


def test_quantile_hard_examples():
    res = empirical_quantile([4.0, 2.0, 8.0, 6.0], 0.5, 0.0)
    assert res.value == 4.0
    assert np.array_equal(res.gradient, [1.0, 0.0, 0.0, 0.0])


def test_quantile_constant_vector():
    for eps in (0.0, 0.1, 5.0):
        res = empirical_quantile([3.0, 3.0, 3.0], 0.5, eps)
        assert res.value == pytest.approx(3.0, abs=1e-9)


def test_quantile_rejects_bad_p():
    for p in (0.0, 1.0, -0.1, 1.1):
        with pytest.raises(ValueError):
            empirical_quantile([1.0, 2.0], p)


def test_quantile_normal_mc():
    rng = np.random.default_rng(0)
    v = rng.standard_normal(100000)
    res = empirical_quantile(v, 0.975, 0.0)
    assert abs(res.value - 1.95996) < 0.02


def test_quantile_exhaustive_small_vectors():
    for L in range(1, 9):
        for combo in itertools.product((-1.0, 0.0, 1.0), repeat=L):
            v = np.array(combo)
            for p in (0.1, 0.5, 0.9):
                k = int(np.ceil(p * L)) - 1
                expect = np.sort(v)[k]
                got = empirical_quantile(v, p, 0.0).value
                assert got == expect


@pytest.mark.parametrize("seed", range(5))
def test_quantile_gradient_matches_fd(seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=20)
    eps = 0.5
    res = empirical_quantile(v, 0.7, eps)
    h = 1e-6
    for i in range(20):
        e = np.zeros(20)
        e[i] = h
        fd = (empirical_quantile(v + e, 0.7, eps).value
              - empirical_quantile(v - e, 0.7, eps).value) / (2 * h)
        assert res.gradient[i] == pytest.approx(fd, abs=1e-4)


def test_batch_matches_single():
    rng = np.random.default_rng(3)
    V = rng.normal(size=(17, 30))
    eps = 0.25
    batch = soft_sort_values_batch(V, eps)
    for r in range(17):
        assert np.allclose(batch[r], soft_sort(V[r], eps).values, atol=1e-12)
    q = empirical_quantile_batch(V, 0.95, eps)
    for r in range(17):
        assert q[r] == pytest.approx(empirical_quantile(V[r], 0.95, eps).value)
    q0 = empirical_quantile_batch(V, 0.95, 0.0)
    for r in range(17):
        assert q0[r] == pytest.approx(empirical_quantile(V[r], 0.95, 0.0).value)


def test_quantile_returns_dataclass():
    res = empirical_quantile([1.0, 2.0], 0.5, 0.0)
    assert isinstance(res, QuantileResult)
