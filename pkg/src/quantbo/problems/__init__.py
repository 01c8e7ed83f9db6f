"""Benchmark problem registry: 20 synthetic composite problems plus the
environmental calibration and Williams-Otto reactor applications."""

from __future__ import annotations

import numpy as np

from quantbo.acquisition import FuncOuter
from quantbo.problems.base import (
    CompositeProblem,
    RegistrationError,
    register,
    registry_get,
    registry_names,
)
from quantbo.problems import environmental as _environmental
from quantbo.problems import synthetic as _synthetic
from quantbo.problems import williams_otto as _williams_otto
from quantbo.problems.environmental import environmental_concentration
from quantbo.problems.synthetic import ex216, ex314
from quantbo.problems.williams_otto import (
    reference_optimum,
    steady_state_batch,
    williams_otto_blackbox,
)

_synthetic.register_all()
_environmental.register_all()
_williams_otto.register_all()


def infeasible_toy() -> CompositeProblem:
    """1-d problem whose constraint f_1 = -1 - h(x)^2 is everywhere below
    -1, so a correct infeasibility check must eventually trigger.  Kept
    out of the registry: it exists to exercise the declaration path, not
    the benchmark suite."""

    def h(x):
        return np.array([float(x[0])])

    def ev0(x, y):
        return y[..., 0]

    def gy0(x, y):
        return np.ones(np.shape(y))

    def gx0(x, y):
        shape = np.broadcast_shapes(np.shape(x), np.shape(y)[:-1] + (1,))
        return np.zeros(shape)

    def ev1(x, y):
        return -1.0 - y[..., 0] ** 2

    def gy1(x, y):
        return -2.0 * y

    return CompositeProblem(
        name="infeasible-toy",
        box=[[0.0, 1.0]],
        blackbox=h,
        outers=[FuncOuter(ev0, gx0, gy0), FuncOuter(ev1, gx0, gy1)],
        m=1,
        known_optimum=None,
        x_star=None,
        optimum_verified=False,
    )


__all__ = [
    "CompositeProblem",
    "RegistrationError",
    "environmental_concentration",
    "ex216",
    "ex314",
    "infeasible_toy",
    "reference_optimum",
    "register",
    "registry_get",
    "registry_names",
    "steady_state_batch",
    "williams_otto_blackbox",
]
