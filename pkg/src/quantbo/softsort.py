"""Hard and regularized sorting with exact Jacobian-vector products.

The regularized sort is the Euclidean projection of rho/eps onto the
permutahedron of the input, computed exactly by pool-adjacent-violators
isotonic regression after one O(L log L) sort.  Its Jacobian is a
block-averaging matrix over the isotonic pools composed with the sort
permutation, so JVP/VJP cost O(L).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit


@njit(cache=True)
def _isotonic_decreasing(y, sol, target):
    """PAV solve of argmin_{v_1 >= ... >= v_n} 0.5 * ||v - y||^2.

    target[i] = j and target[j] = i for every active pool [i..j].
    """
    n = y.shape[0]
    c = np.ones(n)
    sums = np.empty(n)
    for i in range(n):
        sol[i] = y[i]
        sums[i] = y[i]
        target[i] = i

    i = 0
    while i < n:
        k = target[i] + 1
        if k == n:
            break
        if sol[i] > sol[k]:
            i = k
            continue
        sum_y = sums[i]
        sum_c = c[i]
        while True:
            # Merging while the decreasing constraint is violated.
            prev_y = sol[k]
            sum_y += sums[k]
            sum_c += c[k]
            k = target[k] + 1
            if k == n or prev_y > sol[k]:
                sol[i] = sum_y / sum_c
                sums[i] = sum_y
                c[i] = sum_c
                target[i] = k - 1
                target[k - 1] = i
                if i > 0:
                    # Backtrack so the scan stays single-pass.
                    i = target[i - 1]
                break

    i = 0
    while i < n:
        k = target[i] + 1
        sol[i + 1:k] = sol[i]
        i = k


@njit(cache=True)
def _soft_sort_core(vs, eps, sol, target):
    """Ascending regularized sort of an already ascending-sorted vs."""
    n = vs.shape[0]
    y = np.empty(n)
    for i in range(n):
        # rho = (L, L-1, ..., 1); projection target is rho/eps.
        y[i] = (n - i) / eps + vs[i]
    _isotonic_decreasing(y, sol, target)
    for i in range(n):
        sol[i] -= (n - i) / eps


@njit(cache=True)
def _soft_sort_batch_core(V, eps):
    n_rows, L = V.shape
    out = np.empty((n_rows, L))
    sol = np.empty(L)
    target = np.empty(L, dtype=np.int64)
    for r in range(n_rows):
        vs = np.sort(V[r])
        _soft_sort_core(vs, eps, sol, target)
        out[r] = sol
    return out


@dataclass(frozen=True)
class SortResult:
    """Ascending sort with stable tie-breaking by source index."""

    values: np.ndarray
    permutation: np.ndarray


@dataclass(frozen=True)
class SoftSortResult:
    """Regularized ascending sort plus the data needed for O(L) JVPs.

    block_start[i] is the first sorted position of the isotonic pool
    containing sorted position i; positions sharing a pool share an
    averaged output value and a uniform Jacobian row over the pool.
    """

    values: np.ndarray
    permutation: np.ndarray
    block_start: np.ndarray
    epsilon: float

    def jvp(self, tangent: np.ndarray) -> np.ndarray:
        """Apply the Jacobian to a tangent in input coordinates."""
        t = np.asarray(tangent, dtype=float)[self.permutation]
        return _block_average(t, self.block_start)

    def vjp(self, cotangent: np.ndarray) -> np.ndarray:
        """Apply the Jacobian transpose to a cotangent in output coordinates."""
        g = _block_average(np.asarray(cotangent, dtype=float), self.block_start)
        out = np.empty_like(g)
        out[self.permutation] = g
        return out


def _block_average(g: np.ndarray, block_start: np.ndarray) -> np.ndarray:
    out = np.empty_like(g)
    i = 0
    n = g.shape[0]
    while i < n:
        j = i + 1
        while j < n and block_start[j] == block_start[i]:
            j += 1
        out[i:j] = g[i:j].mean()
        i = j
    return out


def _check_vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.shape[0] < 1:
        raise ValueError("expected a non-empty 1-d vector")
    if np.isnan(v).any():
        raise ValueError("input contains NaN")
    return v


def hard_sort(v) -> SortResult:
    """Ascending sort with stable tie-breaking by source index."""
    v = _check_vector(v)
    perm = np.argsort(v, kind="stable")
    return SortResult(values=v[perm], permutation=perm)


def soft_sort(v, epsilon: float) -> SoftSortResult:
    """Regularized ascending sort (exact permutahedron projection)."""
    v = _check_vector(v)
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    perm = np.argsort(v, kind="stable")
    vs = v[perm]
    L = v.shape[0]
    sol = np.empty(L)
    target = np.empty(L, dtype=np.int64)
    _soft_sort_core(vs, float(epsilon), sol, target)
    block_start = _blocks_from_target(target)
    return SoftSortResult(
        values=sol, permutation=perm, block_start=block_start, epsilon=float(epsilon)
    )


def _blocks_from_target(target: np.ndarray) -> np.ndarray:
    n = target.shape[0]
    block_start = np.empty(n, dtype=np.int64)
    i = 0
    while i < n:
        k = target[i] + 1
        block_start[i:k] = i
        i = k
    return block_start


def quantile_index(p: float, L: int) -> int:
    """0-based index of the ceil(p*L)-th ascending order statistic."""
    if not 0.0 < p < 1.0:
        raise ValueError("probability level must lie in (0, 1)")
    return int(np.ceil(p * L)) - 1


@dataclass(frozen=True)
class QuantileResult:
    value: float
    gradient: np.ndarray


def empirical_quantile(v, p: float, epsilon: float = 0.0) -> QuantileResult:
    """ceil(p*L)-th order statistic, optionally through the regularized sort.

    With epsilon > 0 the value is the corresponding coordinate of the
    regularized sort and the gradient is its exact Jacobian row (uniform
    over the isotonic pool containing the coordinate).
    """
    v = _check_vector(v)
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    L = v.shape[0]
    k = quantile_index(p, L)
    k = min(k, L - 1)
    grad = np.zeros(L)
    if epsilon == 0.0:
        res = hard_sort(v)
        grad[res.permutation[k]] = 1.0
        return QuantileResult(value=float(res.values[k]), gradient=grad)
    res = soft_sort(v, epsilon)
    s = res.block_start[k]
    e = s + 1
    while e < L and res.block_start[e] == s:
        e += 1
    grad[res.permutation[s:e]] = 1.0 / (e - s)
    return QuantileResult(value=float(res.values[k]), gradient=grad)


def soft_sort_values_batch(V: np.ndarray, epsilon: float) -> np.ndarray:
    """Row-wise regularized ascending sort values (no gradient context)."""
    V = np.ascontiguousarray(V, dtype=float)
    if V.ndim != 2:
        raise ValueError("expected an (N, L) matrix")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    return _soft_sort_batch_core(V, float(epsilon))


def empirical_quantile_batch(V: np.ndarray, p: float, epsilon: float) -> np.ndarray:
    """Row-wise quantile values for a batch of sample vectors."""
    V = np.asarray(V, dtype=float)
    if V.ndim != 2:
        raise ValueError("expected an (N, L) matrix")
    k = min(quantile_index(p, V.shape[1]), V.shape[1] - 1)
    if epsilon == 0.0:
        return np.partition(V, k, axis=1)[:, k]
    return soft_sort_values_batch(V, epsilon)[:, k]
