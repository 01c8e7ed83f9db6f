"""Synthetic composite benchmark problems (10 unconstrained, 10 constrained).

Each problem splits a classical test function into a black-box inner part
h and known outer parts g_i.  Constraints use the convention g_i >= 0
feasible.  A few published definitions contain typos that contradict
their own recorded optima; those ship a "corrected" variant (the default)
next to the "printed" one, with the discrepancy noted on the problem.
"""

from __future__ import annotations

import numpy as np

from quantbo.acquisition import FuncOuter, LinearOuter
from quantbo.problems.base import (
    CompositeProblem,
    const_linear,
    pure_x,
    register,
)


def _point(x):
    """1-d view of a single point that may arrive with a leading axis."""
    x = np.asarray(x, dtype=float)
    return x.reshape(-1, x.shape[-1])[0] if x.ndim > 1 else x


def _zeros_like_lead(x):
    return np.zeros(np.shape(x)[:-1])


# -- unconstrained --------------------------------------------------------


def booth() -> CompositeProblem:
    def h(x):
        return np.array([(x[0] + 2 * x[1] - 7) ** 2])

    def b(x):
        return -((2 * x[..., 0] + x[..., 1] - 5) ** 2)

    def grad_b(x):
        t = 2 * x[..., 0] + x[..., 1] - 5
        return np.stack([-4 * t, -2 * t], axis=-1)

    return CompositeProblem(
        name="booth",
        box=[[-10, 10]] * 2,
        blackbox=h,
        outers=[const_linear([-1.0], b, grad_b)],
        m=1,
        known_optimum=0.0,
        x_star=[1.0, 3.0],
    )


def wolfe() -> CompositeProblem:
    # The published x* = [1,1,1] is inconsistent with the function (value
    # -7/3 there); the actual maximizer on the box is the origin.
    def h(x):
        return np.array([(x[0] ** 2 + x[1] ** 2 - x[0] * x[1]) ** 0.75])

    def b(x):
        return -x[..., 2]

    def grad_b(x):
        g = np.zeros(np.shape(x))
        g[..., 2] = -1.0
        return g

    return CompositeProblem(
        name="wolfe",
        box=[[0, 2]] * 3,
        blackbox=h,
        outers=[const_linear([-4.0 / 3.0], b, grad_b)],
        m=1,
        known_optimum=0.0,
        x_star=[0.0, 0.0, 0.0],
        notes="recorded x* corrected from [1,1,1] to the origin",
    )


def rastrigin() -> CompositeProblem:
    def h(x):
        return np.array(
            [
                x[0] ** 2 - 10 * np.cos(2 * np.pi * x[0]),
                x[1] ** 2 - 10 * np.cos(2 * np.pi * x[1]),
            ]
        )

    def b(x):
        x3 = x[..., 2]
        return -(30 + x3**2 - 10 * np.cos(2 * np.pi * x3))

    def grad_b(x):
        g = np.zeros(np.shape(x))
        x3 = x[..., 2]
        g[..., 2] = -(2 * x3 + 20 * np.pi * np.sin(2 * np.pi * x3))
        return g

    return CompositeProblem(
        name="rastrigin",
        box=[[-5, 5]] * 3,
        blackbox=h,
        outers=[const_linear([-1.0, -1.0], b, grad_b)],
        m=2,
        known_optimum=0.0,
        x_star=[0.0, 0.0, 0.0],
    )


def colville() -> CompositeProblem:
    def h(x):
        return np.array(
            [100 * (x[0] ** 2 - x[1]) ** 2 + (x[2] - 1) ** 2 + (x[0] - 1) ** 2]
        )

    def b(x):
        x2, x3, x4 = x[..., 1], x[..., 2], x[..., 3]
        return -(
            90 * (x3**2 - x4) ** 2
            + 10.1 * ((x2 - 1) ** 2 + (x4 - 1) ** 2)
            + 19.8 * (x2 - 1) * (x4 - 1)
        )

    def grad_b(x):
        x2, x3, x4 = x[..., 1], x[..., 2], x[..., 3]
        g = np.zeros(np.shape(x))
        g[..., 1] = -(20.2 * (x2 - 1) + 19.8 * (x4 - 1))
        g[..., 2] = -360 * x3 * (x3**2 - x4)
        g[..., 3] = -(-180 * (x3**2 - x4) + 20.2 * (x4 - 1) + 19.8 * (x2 - 1))
        return g

    return CompositeProblem(
        name="colville",
        box=[[-10, 10]] * 4,
        blackbox=h,
        outers=[const_linear([-1.0], b, grad_b)],
        m=1,
        known_optimum=0.0,
        x_star=[1.0, 1.0, 1.0, 1.0],
    )


def friedman() -> CompositeProblem:
    # The published optimum (27.5 at x3 = 0.5, x4 = x5 = -1.5 with
    # sin(pi x1 x2) = -1) lies outside the box and is unattainable on it;
    # the value is recorded as published but not verified.
    def h(x):
        return np.array([np.sin(np.pi * x[0] * x[1])])

    def b(x):
        return -(20 * (x[..., 2] - 0.5) ** 2 + 10 * x[..., 3] + 5 * x[..., 4])

    def grad_b(x):
        g = np.zeros(np.shape(x))
        g[..., 2] = -40 * (x[..., 2] - 0.5)
        g[..., 3] = -10.0
        g[..., 4] = -5.0
        return g

    return CompositeProblem(
        name="friedman",
        box=[[0, 1]] * 5,
        blackbox=h,
        outers=[const_linear([-10.0], b, grad_b)],
        m=1,
        known_optimum=27.5,
        x_star=None,
        optimum_verified=False,
        notes="recorded optimum unattainable inside the box",
    )


def dolan() -> CompositeProblem:
    # The published value 529.87 does not match the published x*
    # (objective 510.03 there); recorded verbatim, unverified.
    def h(x):
        return np.array(
            [
                (x[0] + 1.7 * x[1]) * np.sin(x[0]),
                1.5 * x[2] - 0.1 * x[3] * np.cos(x[4] + x[3] - x[0]),
            ]
        )

    def b(x):
        return -(0.2 * x[..., 4] ** 2 - x[..., 1] - 1)

    def grad_b(x):
        g = np.zeros(np.shape(x))
        g[..., 1] = 1.0
        g[..., 4] = -0.4 * x[..., 4]
        return g

    return CompositeProblem(
        name="dolan",
        box=[[-100, 100]] * 5,
        blackbox=h,
        outers=[const_linear([-1.0, 1.0], b, grad_b)],
        m=2,
        known_optimum=529.87,
        x_star=[98.964, 100.0, 100.0, 99.224, -0.25],
        optimum_verified=False,
        notes="recorded optimum inconsistent with recorded x*",
    )


def rosenbrock() -> CompositeProblem:
    # Published inner entries read x_{i+1}^2 - x_i^2 and two outer terms
    # lack their squares, which contradicts the recorded optimum of 0;
    # corrected to the classical chained form (maximum 0 at all-ones).
    def h(x):
        return np.array(
            [
                x[1] - x[0] ** 2,
                x[2] - x[1] ** 2,
                x[3] - x[2] ** 2,
                (1 - x[3]) ** 2,
            ]
        )

    def ev(x, y):
        x4, x5, x6 = x[..., 3], x[..., 4], x[..., 5]
        quad = sum(
            100 * y[..., i] ** 2 + (1 - x[..., i]) ** 2 for i in range(3)
        )
        return -(
            quad
            + 100 * (x5 - x4**2) ** 2
            + y[..., 3]
            + 100 * (x6 - x5**2) ** 2
            + (1 - x5) ** 2
        )

    def gy(x, y):
        g = np.zeros(np.broadcast_shapes(np.shape(y)))
        for i in range(3):
            g[..., i] = -200 * y[..., i]
        g[..., 3] = -1.0
        return g

    def gx(x, y):
        x4, x5, x6 = x[..., 3], x[..., 4], x[..., 5]
        shape = np.broadcast_shapes(np.shape(x), np.shape(y)[:-1] + (6,))
        g = np.zeros(shape)
        for i in range(3):
            g[..., i] = 2 * (1 - x[..., i])
        g[..., 3] = 400 * x4 * (x5 - x4**2)
        g[..., 4] = (
            -200 * (x5 - x4**2) + 400 * x5 * (x6 - x5**2) + 2 * (1 - x5)
        )
        g[..., 5] = -200 * (x6 - x5**2)
        return g

    return CompositeProblem(
        name="rosenbrock",
        box=[[-2, 2]] * 6,
        blackbox=h,
        outers=[FuncOuter(ev, gx, gy)],
        m=4,
        known_optimum=0.0,
        x_star=np.ones(6),
        notes="corrected to the classical chained form; recorded x* all-ones",
    )


def zakharov() -> CompositeProblem:
    # h is the squared weighted sum; the outer adds its square, giving the
    # classical sum + s^2 + s^4 shape.
    w = 0.5 * np.arange(1, 8)

    def h(x):
        return np.array([float(np.dot(w, x) ** 2)])

    def ev(x, y):
        s2 = np.sum(x**2, axis=-1)
        yy = y[..., 0]
        return -(s2 + yy + yy**2)

    def gy(x, y):
        g = np.zeros(np.shape(y))
        g[..., 0] = -(1 + 2 * y[..., 0])
        return g

    def gx(x, y):
        shape = np.broadcast_shapes(np.shape(x), np.shape(y)[:-1] + (7,))
        return np.broadcast_to(-2 * x, shape).copy()

    return CompositeProblem(
        name="zakharov",
        box=[[-5, 10]] * 7,
        blackbox=h,
        outers=[FuncOuter(ev, gx, gy)],
        m=1,
        known_optimum=0.0,
        x_star=np.zeros(7),
    )


def powell() -> CompositeProblem:
    def h(x):
        return np.array(
            [
                (x[0] + 10 * x[1]) ** 2,
                5 * (x[2] - x[3]) ** 2,
                (x[5] - 2 * x[6]) ** 4,
                10 * (x[4] - x[7]) ** 4,
            ]
        )

    def b(x):
        return -(
            (x[..., 4] + 10 * x[..., 5]) ** 2
            + 5 * (x[..., 6] - x[..., 7]) ** 2
            + (x[..., 1] - 2 * x[..., 2]) ** 4
            + 10 * (x[..., 0] - x[..., 3]) ** 4
        )

    def grad_b(x):
        g = np.zeros(np.shape(x))
        t1 = x[..., 4] + 10 * x[..., 5]
        t2 = x[..., 6] - x[..., 7]
        t3 = x[..., 1] - 2 * x[..., 2]
        t4 = x[..., 0] - x[..., 3]
        g[..., 0] = -40 * t4**3
        g[..., 1] = -4 * t3**3
        g[..., 2] = 8 * t3**3
        g[..., 3] = 40 * t4**3
        g[..., 4] = -2 * t1
        g[..., 5] = -20 * t1
        g[..., 6] = -10 * t2
        g[..., 7] = 10 * t2
        return g

    return CompositeProblem(
        name="powell",
        box=[[-4, 5]] * 8,
        blackbox=h,
        outers=[const_linear([-1.0] * 4, b, grad_b)],
        m=4,
        known_optimum=0.0,
        x_star=np.zeros(8),
    )


def styblinski_tang() -> CompositeProblem:
    # The published outer sum drops the leading 0.5 factor's parentheses;
    # the 0.5(x^4 - 16x^2 + 5x) reading matches the recorded optimum.
    def term(v):
        return 0.5 * (v**4 - 16 * v**2 + 5 * v)

    def dterm(v):
        return 0.5 * (4 * v**3 - 32 * v + 5)

    def h(x):
        return np.array([term(x[i]) for i in range(4)])

    def b(x):
        return -sum(term(x[..., i]) for i in range(4, 9))

    def grad_b(x):
        g = np.zeros(np.shape(x))
        for i in range(4, 9):
            g[..., i] = -dterm(x[..., i])
        return g

    return CompositeProblem(
        name="styblinski-tang",
        box=[[-5, 5]] * 9,
        blackbox=h,
        outers=[const_linear([-1.0] * 4, b, grad_b)],
        m=4,
        known_optimum=352.49,
        x_star=-2.904 * np.ones(9),
    )


# -- constrained ----------------------------------------------------------


def bazaraa() -> CompositeProblem:
    def h(x):
        return np.array(
            [2 * x[1] ** 2, 2 * x[0] * x[1] + 6 * x[0] + 4 * x[1]]
        )

    def b0(x):
        return -(2 * x[..., 0] ** 2 + 2 * x[..., 1] ** 2)

    def gb0(x):
        return np.stack([-4 * x[..., 0], -4 * x[..., 1]], axis=-1)

    def b1(x):
        return -(5 * x[..., 0] + x[..., 1] - 5)

    def gb1(x):
        return np.broadcast_to([-5.0, -1.0], np.shape(x)).copy()

    def b2(x):
        return x[..., 0]

    def gb2(x):
        return np.broadcast_to([1.0, 0.0], np.shape(x)).copy()

    return CompositeProblem(
        name="bazaraa",
        box=[[0.01, 1]] * 2,
        blackbox=h,
        outers=[
            const_linear([0.0, 1.0], b0, gb0),
            pure_x(2, b1, gb1),
            const_linear([-1.0, 0.0], b2, gb2),
        ],
        m=2,
        known_optimum=6.613,
        x_star=[0.868, 0.659],
    )


def spring() -> CompositeProblem:
    # Published objective and first constraint contradict the recorded
    # optimum -0.0127 at [0.052, 0.357, 11.289]; corrected to the
    # classical coil-spring weight formulation split over h = [x1^2 x2,
    # x2^3 x3].
    def h(x):
        return np.array([x[0] ** 2 * x[1], x[1] ** 3 * x[2]])

    # g0 = -(x3 + 2) y1
    def a0(x):
        z = _zeros_like_lead(x)
        return np.stack([-(x[..., 2] + 2.0), z], axis=-1)

    def ja0(x):
        x = _point(x)
        return np.array([[0.0, 0.0, -1.0], [0.0, 0.0, 0.0]])

    g0 = LinearOuter(a0, lambda x: _zeros_like_lead(x),
                     ja0, lambda x: np.zeros(np.shape(x)))

    # g1 = y2 / (71785 x1^4) - 1
    def a1(x):
        z = _zeros_like_lead(x)
        return np.stack([z, 1.0 / (71785.0 * x[..., 0] ** 4)], axis=-1)

    def ja1(x):
        x = _point(x)
        return np.array(
            [[0.0, 0.0, 0.0], [-4.0 / (71785.0 * x[0] ** 5), 0.0, 0.0]]
        )

    g1 = LinearOuter(a1, lambda x: _zeros_like_lead(x) - 1.0,
                     ja1, lambda x: np.zeros(np.shape(x)))

    # g2: surge-frequency style constraint, pure x
    def b2(x):
        x1, x2 = x[..., 0], x[..., 1]
        num = 4 * x2**2 - x1 * x2
        den = 12566.0 * (x1**3 * x2 - x1**4)
        return -(num / den + 1.0 / (5108.0 * x1**2) - 1.0)

    def gb2(x):
        x1, x2 = x[..., 0], x[..., 1]
        num = 4 * x2**2 - x1 * x2
        den = 12566.0 * (x1**3 * x2 - x1**4)
        dnum1, dnum2 = -x2, 8 * x2 - x1
        dden1 = 12566.0 * (3 * x1**2 * x2 - 4 * x1**3)
        dden2 = 12566.0 * x1**3
        g = np.zeros(np.shape(x))
        g[..., 0] = -(
            (dnum1 * den - num * dden1) / den**2 - 2.0 / (5108.0 * x1**3)
        )
        g[..., 1] = -((dnum2 * den - num * dden2) / den**2)
        return g

    g2 = pure_x(2, b2, gb2)

    # g3 = 140.45 x1 x2 / y2 - 1 (published form divides by y2 = x2^3 x3)
    def ev3(x, y):
        return 140.45 * x[..., 0] * x[..., 1] / y[..., 1] - 1.0

    def gy3(x, y):
        g = np.zeros(np.broadcast_shapes(np.shape(y)))
        g[..., 1] = -140.45 * x[..., 0] * x[..., 1] / y[..., 1] ** 2
        return g

    def gx3(x, y):
        shape = np.broadcast_shapes(np.shape(x), np.shape(y)[:-1] + (3,))
        g = np.zeros(shape)
        g[..., 0] = 140.45 * x[..., 1] / y[..., 1]
        g[..., 1] = 140.45 * x[..., 0] / y[..., 1]
        return g

    g3 = FuncOuter(ev3, gx3, gy3)

    def b4(x):
        return 1.0 - (x[..., 0] + x[..., 1]) / 1.5

    def gb4(x):
        g = np.zeros(np.shape(x))
        g[..., 0] = -1.0 / 1.5
        g[..., 1] = -1.0 / 1.5
        return g

    g4 = pure_x(2, b4, gb4)

    return CompositeProblem(
        name="spring",
        box=[[0.05, 2], [0.25, 1.3], [2, 15]],
        blackbox=h,
        outers=[g0, g1, g2, g3, g4],
        m=2,
        known_optimum=-0.0127,
        x_star=[0.052, 0.357, 11.289],
        notes="objective and first constraint corrected to the classical "
        "coil-spring forms; recorded x* rounded to 3 decimals",
    )


def ex314(variant: str = "corrected") -> CompositeProblem:
    """d=3 quadratically constrained problem; the published text negates
    the objective and two linear constraints and references x6 in a d=3
    problem.  The corrected variant (default) attains the recorded
    optimum 4 at [0.5, 0, 3]; grid-verified."""
    if variant not in ("corrected", "printed"):
        raise ValueError("variant must be 'corrected' or 'printed'")
    s = 1.0 if variant == "corrected" else -1.0

    def h(x):
        return np.array(
            [4 * x[0] - 2 * x[1] + 2 * x[2], x[1] - x[2] - 2 * x[0]]
        )

    # corrected g0 = -y2; printed g0 = y2
    g0 = const_linear(
        [0.0, -s],
        lambda x: _zeros_like_lead(x),
        lambda x: np.zeros(np.shape(x)),
    )

    # corrected g1 = x1 y1 + q(x); printed is its negation
    def a1(x):
        z = _zeros_like_lead(x)
        return np.stack([s * x[..., 0], z], axis=-1)

    def ja1(x):
        return np.array([[s, 0.0, 0.0], [0.0, 0.0, 0.0]])

    def b1(x):
        x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
        q = (
            2 * x2**2
            - 2 * x1 * x2
            - 2 * x2 * x3
            + 2 * x1 * x3
            + 2 * x3**2
            - 20 * x1
            + 9 * x2
            - 13 * x3
            + 24
        )
        return s * q

    def gb1(x):
        x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
        g = np.zeros(np.shape(x))
        g[..., 0] = s * (-2 * x2 + 2 * x3 - 20)
        g[..., 1] = s * (4 * x2 - 2 * x1 - 2 * x3 + 9)
        g[..., 2] = s * (-2 * x2 + 2 * x1 + 4 * x3 - 13)
        return g

    g1 = LinearOuter(a1, b1, ja1, gb1)

    def b2(x):
        if variant == "corrected":
            return 4.0 - x[..., 0] - x[..., 1] - x[..., 2]
        return x[..., 0] + 2 * x[..., 2] - 4.0

    def gb2(x):
        if variant == "corrected":
            return np.broadcast_to([-1.0, -1.0, -1.0], np.shape(x)).copy()
        return np.broadcast_to([1.0, 0.0, 2.0], np.shape(x)).copy()

    def b3(x):
        if variant == "corrected":
            return 6.0 - 3 * x[..., 1] - x[..., 2]
        return 3 * x[..., 1] + x[..., 2] - 6.0

    def gb3(x):
        sgn = -1.0 if variant == "corrected" else 1.0
        return np.broadcast_to([0.0, 3 * sgn, sgn], np.shape(x)).copy()

    return CompositeProblem(
        name="ex314",
        box=[[-2, 2], [0, 6], [-3, 3]],
        blackbox=h,
        outers=[g0, g1, pure_x(2, b2, gb2), pure_x(2, b3, gb3)],
        m=2,
        known_optimum=4.0,
        x_star=[0.5, 0.0, 3.0],
        optimum_verified=(variant == "corrected"),
        notes=f"variant={variant}; printed signs contradict the recorded "
        "optimum (printed reading yields 6 at [2,0,2])",
    )


def rosen_suzuki() -> CompositeProblem:
    def h(x):
        return np.array(
            [2 * x[2] ** 2 - 21 * x[2] + 7 * x[3], x[2] ** 2 + 2 * x[3] ** 2]
        )

    def b0(x):
        x1, x2, x4 = x[..., 0], x[..., 1], x[..., 3]
        return -(x1**2 + x2**2 + x4**2 - 5 * x1 - 5 * x2)

    def gb0(x):
        g = np.zeros(np.shape(x))
        g[..., 0] = -(2 * x[..., 0] - 5)
        g[..., 1] = -(2 * x[..., 1] - 5)
        g[..., 3] = -2 * x[..., 3]
        return g

    def b1(x):
        x1, x2, x3, x4 = (x[..., i] for i in range(4))
        return 8 - x1**2 - x2**2 - x3**2 - x4**2 - x1 + x2 - x3 + x4

    def gb1(x):
        x1, x2, x3, x4 = (x[..., i] for i in range(4))
        return np.stack(
            [-2 * x1 - 1, -2 * x2 + 1, -2 * x3 - 1, -2 * x4 + 1], axis=-1
        )

    def b2(x):
        x1, x2, x4 = x[..., 0], x[..., 1], x[..., 3]
        return 10 - x1**2 - 2 * x2**2 + x1 + x4

    def gb2(x):
        g = np.zeros(np.shape(x))
        g[..., 0] = -2 * x[..., 0] + 1
        g[..., 1] = -4 * x[..., 1]
        g[..., 3] = 1.0
        return g

    def b3(x):
        x1, x2, x3, x4 = (x[..., i] for i in range(4))
        return 5 - 2 * x1**2 - x2**2 - x3**2 - 2 * x1 + x2 + x4

    def gb3(x):
        x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
        ones = np.ones(np.shape(x)[:-1])
        return np.stack(
            [-4 * x1 - 2, -2 * x2 + 1, -2 * x3, ones], axis=-1
        )

    return CompositeProblem(
        name="rosen-suzuki",
        box=[[-2, 2]] * 4,
        blackbox=h,
        outers=[
            const_linear([-1.0, 0.0], b0, gb0),
            pure_x(2, b1, gb1),
            const_linear([0.0, -1.0], b2, gb2),
            pure_x(2, b3, gb3),
        ],
        m=2,
        known_optimum=44.0,
        x_star=[0.0, 1.0, 2.0, -1.0],
    )


def st_bpv1() -> CompositeProblem:
    def h(x):
        return np.array([x[0] * x[2], x[0] + 3 * x[1], 2 * x[0] + x[1]])

    def b0(x):
        return -(x[..., 1] * x[..., 3])

    def gb0(x):
        g = np.zeros(np.shape(x))
        g[..., 1] = -x[..., 3]
        g[..., 3] = -x[..., 1]
        return g

    def b3(x):
        return -(x[..., 2] + x[..., 3] - 15)

    def gb3(x):
        return np.broadcast_to([0.0, 0.0, -1.0, -1.0], np.shape(x)).copy()

    return CompositeProblem(
        name="st-bpv1",
        box=[[0, 27], [0, 16], [0, 10], [0, 10]],
        blackbox=h,
        outers=[
            const_linear([-1.0, 0.0, 0.0], b0, gb0),
            const_linear(
                [0.0, 1.0, 0.0],
                lambda x: _zeros_like_lead(x) - 30.0,
                lambda x: np.zeros(np.shape(x)),
            ),
            const_linear(
                [0.0, 0.0, 1.0],
                lambda x: _zeros_like_lead(x) - 20.0,
                lambda x: np.zeros(np.shape(x)),
            ),
            pure_x(3, b3, gb3),
        ],
        m=3,
        known_optimum=-10.0,
        x_star=[27.0, 1.0, 0.0, 10.0],
    )


def ex211() -> CompositeProblem:
    c = np.array([42.0, 44.0, 45.0, 47.0, 47.5])

    def h(x):
        return np.array(
            [float(np.sum(x**2)), 12 * x[1] + 11 * x[2] + 7 * x[3]]
        )

    def b0(x):
        return -np.sum(c * x, axis=-1)

    def gb0(x):
        return np.broadcast_to(-c, np.shape(x)).copy()

    def b1(x):
        return -(20 * x[..., 0] + 4 * x[..., 4] - 39)

    def gb1(x):
        return np.broadcast_to(
            [-20.0, 0.0, 0.0, 0.0, -4.0], np.shape(x)
        ).copy()

    return CompositeProblem(
        name="ex211",
        box=[[0, 1]] * 5,
        blackbox=h,
        outers=[
            const_linear([50.0, 0.0], b0, gb0),
            const_linear([0.0, -1.0], b1, gb1),
        ],
        m=2,
        known_optimum=17.0,
        x_star=[1.0, 1.0, 0.0, 1.0, 0.0],
    )


def ex212() -> CompositeProblem:
    def h(x):
        return np.array(
            [
                10.5 * x[0] + 7.5 * x[1] + 3.5 * x[2] + 2.5 * x[3] + 1.5 * x[4],
                10 * x[0] + 10 * x[2] + x[5],
            ]
        )

    def b0(x):
        return 10 * x[..., 5] + 0.5 * np.sum(x[..., :5] ** 2, axis=-1)

    def gb0(x):
        g = np.zeros(np.shape(x))
        g[..., :5] = x[..., :5]
        g[..., 5] = 10.0
        return g

    def b1(x):
        return -(
            6 * x[..., 0]
            + 3 * x[..., 1]
            + 3 * x[..., 2]
            + 2 * x[..., 3]
            + x[..., 4]
            - 6.5
        )

    def gb1(x):
        return np.broadcast_to(
            [-6.0, -3.0, -3.0, -2.0, -1.0, 0.0], np.shape(x)
        ).copy()

    return CompositeProblem(
        name="ex212",
        box=[[0, 30]] * 6,
        blackbox=h,
        outers=[
            const_linear([1.0, 0.0], b0, gb0),
            pure_x(2, b1, gb1),
            const_linear(
                [0.0, -1.0],
                lambda x: _zeros_like_lead(x) + 20.0,
                lambda x: np.zeros(np.shape(x)),
            ),
        ],
        m=2,
        known_optimum=213.0,
        x_star=[0.0, 1.0, 0.0, 1.0, 1.0, 20.0],
    )


def g09() -> CompositeProblem:
    def h(x):
        return np.array(
            [
                (x[0] - 10) ** 2 + 5 * (x[1] - 12) ** 2,
                3 * x[1] ** 4 + x[2] + 4 * x[3] ** 2,
            ]
        )

    def b0(x):
        x3, x4, x5, x6, x7 = (x[..., i] for i in range(2, 7))
        return (
            -(x3**4)
            - 3 * (x4 - 11) ** 2
            - 10 * x5**6
            - 7 * x6**2
            - x7**4
            + 4 * x6 * x7
            + 10 * x6
            + 8 * x7
        )

    def gb0(x):
        x3, x4, x5, x6, x7 = (x[..., i] for i in range(2, 7))
        g = np.zeros(np.shape(x))
        g[..., 2] = -4 * x3**3
        g[..., 3] = -6 * (x4 - 11)
        g[..., 4] = -60 * x5**5
        g[..., 5] = -14 * x6 + 4 * x7 + 10
        g[..., 6] = -4 * x7**3 + 4 * x6 + 8
        return g

    def b1(x):
        return 127 - 2 * x[..., 0] * x[..., 1] - 5 * x[..., 4]

    def gb1(x):
        g = np.zeros(np.shape(x))
        g[..., 0] = -2 * x[..., 1]
        g[..., 1] = -2 * x[..., 0]
        g[..., 4] = -5.0
        return g

    def b2(x):
        return (
            282
            - 7 * x[..., 0]
            - 3 * x[..., 1]
            - 10 * x[..., 2] ** 2
            - x[..., 3]
            + x[..., 4]
        )

    def gb2(x):
        g = np.zeros(np.shape(x))
        g[..., 0] = -7.0
        g[..., 1] = -3.0
        g[..., 2] = -20 * x[..., 2]
        g[..., 3] = -1.0
        g[..., 4] = 1.0
        return g

    def b3(x):
        return (
            196
            - 23 * x[..., 0]
            + x[..., 1] ** 2
            - 6 * x[..., 5] ** 2
            + 8 * x[..., 6]
        )

    def gb3(x):
        g = np.zeros(np.shape(x))
        g[..., 0] = -23.0
        g[..., 1] = 2 * x[..., 1]
        g[..., 5] = -12 * x[..., 5]
        g[..., 6] = 8.0
        return g

    def b4(x):
        x1, x2, x3, x6, x7 = (
            x[..., 0],
            x[..., 1],
            x[..., 2],
            x[..., 5],
            x[..., 6],
        )
        return (
            -4 * x1**2 - x2**2 + 3 * x1 * x2 - 2 * x3**2 - 5 * x6 + 11 * x7
        )

    def gb4(x):
        x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
        g = np.zeros(np.shape(x))
        g[..., 0] = -8 * x1 + 3 * x2
        g[..., 1] = -2 * x2 + 3 * x1
        g[..., 2] = -4 * x3
        g[..., 5] = -5.0
        g[..., 6] = 11.0
        return g

    return CompositeProblem(
        name="g09",
        box=[[-10, 10]] * 7,
        blackbox=h,
        outers=[
            const_linear([-1.0, 0.0], b0, gb0),
            const_linear([0.0, -1.0], b1, gb1),
            pure_x(2, b2, gb2),
            pure_x(2, b3, gb3),
            pure_x(2, b4, gb4),
        ],
        m=2,
        known_optimum=-680.63,
        x_star=[2.33, 1.95, -0.48, 4.37, -0.62, 1.04, 1.59],
        notes="recorded x* rounded to 2 decimals",
    )


def ex724() -> CompositeProblem:
    def h(x):
        return np.array(
            [
                x[2] ** 0.71 * x[4],
                4 * x[3] / x[5] + 2 / (x[3] ** 0.71 * x[5]),
                0.4 * (x[0] / x[6]) ** 0.67 - x[1],
            ]
        )

    def b0(x):
        t = 0.4 * (x[..., 1] / x[..., 7]) ** 0.67
        return -(t - x[..., 0] + 10)

    def gb0(x):
        t = 0.4 * (x[..., 1] / x[..., 7]) ** 0.67
        g = np.zeros(np.shape(x))
        g[..., 0] = 1.0
        g[..., 1] = -0.67 * t / x[..., 1]
        g[..., 7] = 0.67 * t / x[..., 7]
        return g

    def b1(x):
        return -(0.0588 * x[..., 4] * x[..., 6] + 0.1 * x[..., 0] - 1)

    def gb1(x):
        g = np.zeros(np.shape(x))
        g[..., 0] = -0.1
        g[..., 4] = -0.0588 * x[..., 6]
        g[..., 6] = -0.0588 * x[..., 4]
        return g

    def b2(x):
        return -(
            0.0588 * x[..., 5] * x[..., 7]
            + 0.1 * x[..., 0]
            + 0.1 * x[..., 1]
            - 1
        )

    def gb2(x):
        g = np.zeros(np.shape(x))
        g[..., 0] = -0.1
        g[..., 1] = -0.1
        g[..., 5] = -0.0588 * x[..., 7]
        g[..., 7] = -0.0588 * x[..., 5]
        return g

    def ev3(x, y):
        u = (x[..., 6] / x[..., 2]) ** 1.3
        return -(4 * x[..., 2] / x[..., 4] + 2 / y[..., 0] + 0.0588 * u - 1)

    def gy3(x, y):
        g = np.zeros(np.broadcast_shapes(np.shape(y)))
        g[..., 0] = 2 / y[..., 0] ** 2
        return g

    def gx3(x, y):
        u = (x[..., 6] / x[..., 2]) ** 1.3
        shape = np.broadcast_shapes(np.shape(x), np.shape(y)[:-1] + (8,))
        g = np.zeros(shape)
        g[..., 2] = -4 / x[..., 4] + 0.0588 * 1.3 * u / x[..., 2]
        g[..., 4] = 4 * x[..., 2] / x[..., 4] ** 2
        g[..., 6] = -0.0588 * 1.3 * u / x[..., 6]
        return g

    def b4(x):
        return -(0.0588 * x[..., 3] ** 1.3 * x[..., 7] - 1)

    def gb4(x):
        g = np.zeros(np.shape(x))
        g[..., 3] = -0.0588 * 1.3 * x[..., 3] ** 0.3 * x[..., 7]
        g[..., 7] = -0.0588 * x[..., 3] ** 1.3
        return g

    return CompositeProblem(
        name="ex724",
        box=[[0.1, 10]] * 8,
        blackbox=h,
        outers=[
            const_linear([0.0, 0.0, -1.0], b0, gb0),
            pure_x(3, b1, gb1),
            pure_x(3, b2, gb2),
            FuncOuter(ev3, gx3, gy3),
            const_linear([0.0, -1.0, 0.0], b4, gb4),
        ],
        m=3,
        known_optimum=-3.92,
        x_star=[6.35, 2.34, 0.67, 0.53, 5.95, 5.32, 1.04, 0.42],
        notes="recorded x* rounded to 2 decimals",
    )


def ex216(variant: str = "corrected") -> CompositeProblem:
    """d=10 concave-QP-style problem; the published objective and all five
    constraints carry flipped signs relative to the recorded optimum 39
    at the binary point, and one inner entry has a malformed term.  The
    corrected variant (default) is vertex-oracle-verified."""
    if variant not in ("corrected", "printed"):
        raise ValueError("variant must be 'corrected' or 'printed'")
    s = 1.0 if variant == "corrected" else -1.0

    def h(x):
        return np.array(
            [
                100 * np.sum(x[:4] ** 2),
                -2 * x[0] - 6 * x[1] - x[2] - 3 * x[4] - 3 * x[5],
                48 * x[2] + 45 * x[3] + 44 * x[4] + 41 * x[5],
                9 * x[0] + 5 * x[1] - 9 * x[3] + x[4] - 8 * x[5],
            ]
        )

    lin0 = np.array([48.0, 42.0, 0, 0, 0, 0, 47.0, 42.0, 45.0, 46.0])

    def b0(x):
        quad = 50 * np.sum(x[..., 4:] ** 2, axis=-1)
        return s * (quad - np.sum(lin0 * x, axis=-1))

    def gb0(x):
        g = np.broadcast_to(-lin0, np.shape(x)).copy()
        g[..., 4:] += 100 * x[..., 4:]
        return s * g

    g0 = const_linear([0.5 * s, 0.0, -s, 0.0], b0, gb0)

    def lin_constraint(a_y, coeffs, const):
        coeffs = np.asarray(coeffs, dtype=float)

        def b(x):
            return s * (np.sum(coeffs * x, axis=-1) + const)

        def gb(x):
            return s * np.broadcast_to(coeffs, np.shape(x)).copy()

        a_y = s * np.asarray(a_y, dtype=float)
        if np.any(a_y):
            return const_linear(a_y, b, gb)
        return pure_x(4, b, gb)

    # corrected signs: each published g_i negated
    g1 = lin_constraint(
        [0, -1, 0, 0], [0, 0, 0, 0, 0, 0, 2, 6, 2, 2], -4.0
    )
    g2 = lin_constraint(
        [0, 0, 0, 0], [-6, 5, -8, 3, 0, -1, -3, -8, -9, 3], 22.0
    )
    g3 = lin_constraint(
        [0, 0, 0, 0], [5, -6, -5, -3, -8, 8, -9, -2, 0, 9], -6.0
    )
    g4 = lin_constraint(
        [0, 0, 0, -1], [0, 0, 0, 0, 0, 0, -3, 9, 9, 3], -23.0
    )
    g5 = lin_constraint(
        [0, 0, 0, 0], [8, -7, 4, 5, 9, -1, 7, 1, -3, 2], -12.0
    )

    return CompositeProblem(
        name="ex216",
        box=[[0, 1]] * 10,
        blackbox=h,
        outers=[g0, g1, g2, g3, g4, g5],
        m=4,
        known_optimum=39.0,
        x_star=[1.0, 0, 0, 1, 1, 1, 0, 1, 1, 1],
        optimum_verified=(variant == "corrected"),
        notes=f"variant={variant}; published signs and one inner term "
        "corrected to match the recorded optimum",
    )


def register_all():
    register(booth())
    register(wolfe())
    register(rastrigin())
    register(colville())
    register(friedman())
    register(dolan())
    register(rosenbrock())
    register(zakharov())
    register(powell())
    register(styblinski_tang(), value_tol=1e-2)
    register(bazaraa(), value_tol=1e-2, constraint_tol=1e-2)
    # x1^-4 terms make the spring constraints very sensitive to the
    # 3-decimal rounding of the recorded x*.
    register(spring(), value_tol=1e-2, constraint_tol=0.05)
    register(ex314())
    register(rosen_suzuki())
    register(st_bpv1())
    register(ex211())
    register(ex212())
    register(g09(), value_tol=0.5, constraint_tol=0.1)
    register(ex724(), value_tol=1e-2, constraint_tol=1e-2)
    register(ex216())
