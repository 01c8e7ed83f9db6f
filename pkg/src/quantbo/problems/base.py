"""Problem container and registry for composite benchmark problems.

A problem bundles a box domain, a black-box inner function h, and the
known outer functions g_0 (objective) and g_1..g_n (constraints, feasible
when >= 0).  Registration verifies the recorded optimum where one is
available.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from quantbo.acquisition import CompositeOuter, LinearOuter


class RegistrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class CompositeProblem:
    """Composite optimization problem: maximize g_0(x, h(x)) subject to
    g_i(x, h(x)) >= 0 over a box."""

    name: str
    box: np.ndarray
    blackbox: callable
    outers: tuple
    m: int
    known_optimum: float | None = None
    x_star: np.ndarray | None = None
    optimum_verified: bool = True
    notes: str = ""

    def __post_init__(self):
        box = np.asarray(self.box, dtype=float)
        if box.ndim != 2 or box.shape[1] != 2 or np.any(box[:, 0] >= box[:, 1]):
            raise ValueError("box must be (d, 2) with lo < hi per dimension")
        object.__setattr__(self, "box", box)
        object.__setattr__(self, "outers", tuple(self.outers))
        if self.x_star is not None:
            object.__setattr__(
                self, "x_star", np.asarray(self.x_star, dtype=float)
            )

    @property
    def d(self) -> int:
        return self.box.shape[0]

    @property
    def n(self) -> int:
        return len(self.outers) - 1

    def evaluate(self, x) -> np.ndarray:
        """Noise-free composite values [f_0(x), f_1(x), ..., f_n(x)]."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(self.blackbox(x), dtype=float)
        return np.array([float(g.eval(x, y)) for g in self.outers])

    def compose(self, x, y) -> np.ndarray:
        """Composite values from an already-observed inner vector y."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return np.array([float(g.eval(x, y)) for g in self.outers])


_REGISTRY: dict[str, CompositeProblem] = {}


def _verify_optimum(problem: CompositeProblem, value_tol: float,
                    constraint_tol: float):
    vals = problem.evaluate(problem.x_star)
    bad = np.where(vals[1:] < -constraint_tol)[0]
    if bad.size:
        raise RegistrationError(
            f"{problem.name}: constraint {bad[0] + 1} violated at recorded "
            f"x* (value {vals[1 + bad[0]]:.4g}, slack {constraint_tol:g})"
        )
    if abs(vals[0] - problem.known_optimum) > value_tol:
        raise RegistrationError(
            f"{problem.name}: objective at recorded x* is {vals[0]:.6g}, "
            f"expected {problem.known_optimum:.6g} within {value_tol:g}"
        )


def register(problem: CompositeProblem, value_tol: float = 1e-4,
             constraint_tol: float = 1e-6):
    if problem.name in _REGISTRY:
        raise RegistrationError(f"duplicate problem name {problem.name!r}")
    if len(problem.outers) < 1:
        raise RegistrationError("problem needs at least an objective outer")
    if problem.optimum_verified and problem.x_star is not None:
        _verify_optimum(problem, value_tol, constraint_tol)
    _REGISTRY[problem.name] = problem
    return problem


def registry_get(name: str) -> CompositeProblem:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(
            f"unknown problem {name!r}; available: {', '.join(sorted(_REGISTRY))}"
        ) from None


def registry_names() -> list[str]:
    return sorted(_REGISTRY)


# -- outer-function builders ---------------------------------------------


def const_linear(a_vec, b, grad_b) -> LinearOuter:
    """Outer g(x, y) = a . y + b(x) with constant coefficient vector a."""
    a_vec = np.asarray(a_vec, dtype=float)
    m = a_vec.shape[0]

    def a(x):
        return np.broadcast_to(a_vec, np.shape(x)[:-1] + (m,))

    def jac_a(x):
        return np.zeros((m, np.shape(x)[-1]))

    return LinearOuter(a, b, jac_a, grad_b)


def pure_x(m, b, grad_b) -> LinearOuter:
    """Outer that ignores y entirely: g(x, y) = b(x)."""
    return const_linear(np.zeros(m), b, grad_b)
