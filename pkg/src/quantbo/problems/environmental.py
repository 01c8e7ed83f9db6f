"""Pollutant-spill calibration problem.

Two spills along a narrow channel produce a concentration profile
observed on a 4 x 6 space-time grid (24 readings).  The black box maps
the four physical parameters to the simulated grid readings; the
objective is the negated squared calibration error against readings
generated from the true parameters, so its maximum is exactly 0.
"""

from __future__ import annotations

import numpy as np

from quantbo.acquisition import FuncOuter
from quantbo.problems.base import CompositeProblem, register

S_GRID = np.array([1.0, 1.5, 2.5, 3.0])
T_GRID = np.array([10.0, 20.0, 30.0, 40.0, 50.0, 60.0])

TRUE_PARAMS = np.array([10.0, 0.07, 1.505, 30.1525])  # (M, D, L, tau)

# Standard calibration box for this benchmark; the true parameters lie
# strictly inside it.
BOX = np.array([[7.0, 13.0], [0.02, 0.12], [0.01, 3.0], [30.01, 30.295]])


def environmental_concentration(s, t, M, D, L, tau) -> float:
    """Concentration at location s and time t for spill parameters.

    First spill of mass M at the origin at time 0; second spill of the
    same mass at location L at time tau.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if D <= 0:
        raise ValueError("D must be positive")
    c = M / np.sqrt(4 * np.pi * D * t) * np.exp(-(s**2) / (4 * D * t))
    if t > tau:
        dt = t - tau
        c += (
            M
            / np.sqrt(4 * np.pi * D * dt)
            * np.exp(-((s - L) ** 2) / (4 * D * dt))
        )
    return float(c)


def concentration_grid(params) -> np.ndarray:
    """24-vector of concentrations over the monitoring grid (s fast)."""
    M, D, L, tau = params
    return np.array(
        [
            environmental_concentration(s, t, M, D, L, tau)
            for t in T_GRID
            for s in S_GRID
        ]
    )


OBSERVATIONS = concentration_grid(TRUE_PARAMS)


def environmental() -> CompositeProblem:
    def ev(x, y):
        return -np.sum((OBSERVATIONS - y) ** 2, axis=-1)

    def gy(x, y):
        return 2.0 * (OBSERVATIONS - y)

    def gx(x, y):
        shape = np.broadcast_shapes(np.shape(x), np.shape(y)[:-1] + (4,))
        return np.zeros(shape)

    return CompositeProblem(
        name="env-model",
        box=BOX,
        blackbox=concentration_grid,
        outers=[FuncOuter(ev, gx, gy)],
        m=24,
        known_optimum=0.0,
        x_star=TRUE_PARAMS,
    )


def register_all():
    register(environmental(), value_tol=1e-10)
