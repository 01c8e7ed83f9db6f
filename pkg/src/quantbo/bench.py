"""Metrics and aggregation over run traces: penalized objective values,
regret traces, the tau improvement test, and performance profiles.

All metrics are computed on the noise-free problem; the harness owns the
true functions even when the runs observed noisy outputs.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from quantbo.problems import registry_get


def penalized_value(problem, x, rho: float) -> float:
    """f_0(x) - rho sum_i [-f_i(x)]^+, noise-free."""
    vals = np.asarray(problem.evaluate(x), dtype=float)
    return float(vals[0] - rho * np.sum(np.maximum(-vals[1:], 0.0)))


def perf_test(f_solver: float, f_start: float, f_best: float, tau: float) -> bool:
    """Improvement test: did the solver close a 1 - tau share of the gap
    between the starting value and the best value any solver reached."""
    return f_solver - f_start >= (1.0 - tau) * (f_best - f_start)


@dataclass(frozen=True)
class RegretTrace:
    """Per-iteration regret of one run against the true optimum.

    simple_regret is the best-so-far gap at queried points, so it is
    non-increasing by construction.  penalized_regret adds the weighted
    constraint hinge at queried points; rec_penalized_regret is the same
    quantity at the recommended point of each iteration.
    """

    problem: str
    solver: str
    seed: int
    simple_regret: np.ndarray
    penalized_regret: np.ndarray
    rec_penalized_regret: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.simple_regret) > 1e-12):
            raise ValueError("simple regret must be non-increasing")


def regret_trace(record, rho: float, optimum: float | None = None,
                 problem=None) -> RegretTrace:
    """Regret trace of a run; the optimum defaults to the registered one."""
    if problem is None:
        problem = registry_get(record.problem)
    if optimum is None:
        optimum = problem.known_optimum
    if optimum is None:
        raise ValueError(
            f"no known optimum for {record.problem}; pass optimum explicitly"
        )
    queried_f0 = np.array(
        [float(problem.evaluate(np.array(it.x))[0]) for it in record.iterations]
    )
    simple = np.minimum.accumulate(optimum - queried_f0)
    pen = np.array(
        [
            optimum - penalized_value(problem, np.array(it.x), rho)
            for it in record.iterations
        ]
    )
    rec_pen = np.array(
        [
            optimum - penalized_value(problem, np.array(it.rec_x), rho)
            for it in record.iterations
        ]
    )
    return RegretTrace(
        problem=record.problem,
        solver=record.solver,
        seed=record.seed,
        simple_regret=simple,
        penalized_regret=pen,
        rec_penalized_regret=rec_pen,
    )


@dataclass(frozen=True)
class ProfileTable:
    """Performance profiles rho_solver(t) and the per-problem pass times."""

    solvers: tuple
    problems: tuple
    tau: float
    budgets: np.ndarray
    pi: dict  # (problem, solver) -> first passing budget or inf
    rho: dict  # solver -> fraction-of-problems curve over budgets

    def __post_init__(self):
        for solver, curve in self.rho.items():
            if np.any(np.diff(curve) < 0):
                raise ValueError(f"profile for {solver} must be non-decreasing")
            if np.any(curve < 0) or np.any(curve > 1):
                raise ValueError(f"profile for {solver} must lie in [0, 1]")

    def to_csv(self) -> str:
        """One row per (solver, problem): pass time plus the solver curve."""
        out = io.StringIO()
        curve_cols = ",".join(f"rho_t{t}" for t in self.budgets)
        out.write(f"solver,problem,tau,pi,{curve_cols}\n")
        for solver in self.solvers:
            curve = ",".join(f"{v:.6g}" for v in self.rho[solver])
            for problem in self.problems:
                pi = self.pi[(problem, solver)]
                pi_txt = "inf" if np.isinf(pi) else str(int(pi))
                out.write(f"{solver},{problem},{self.tau},{pi_txt},{curve}\n")
        return out.getvalue()


def _rec_values(problem, record, rho: float, budget: int) -> np.ndarray:
    """Penalized value of the recommendation at each budget 1..budget;
    traces that stopped early (declared infeasibility) carry their last
    recommendation forward."""
    vals = [
        penalized_value(problem, np.array(it.rec_x), rho)
        for it in record.iterations
    ]
    if len(vals) < budget:
        vals = vals + [vals[-1]] * (budget - len(vals))
    return np.array(vals[:budget])


def build_profiles(records, tau: float, rho: float = 1e5,
                   init_budget: int | None = None,
                   problems_by_name=None) -> ProfileTable:
    """Aggregate runs into performance profiles.

    records must cover a full solver x seed grid per problem; a solver
    with a different seed set on some problem is an error.  The starting
    value per problem is the median over seeds of the best point in the
    initial design (init_budget points; 2d+1 when omitted).
    """
    lookup = problems_by_name.__getitem__ if problems_by_name else registry_get
    by_problem: dict = {}
    for rec in records:
        by_problem.setdefault(rec.problem, {}).setdefault(rec.solver, {})[
            rec.seed
        ] = rec
    if not by_problem:
        raise ValueError("no records given")

    problem_names = tuple(sorted(by_problem))
    solver_names = tuple(sorted({r.solver for r in records}))

    pi = {}
    for name in problem_names:
        solver_map = by_problem[name]
        if set(solver_map) != set(solver_names):
            missing = set(solver_names) - set(solver_map)
            raise ValueError(f"problem {name} missing solvers {sorted(missing)}")
        seed_sets = {frozenset(m) for m in solver_map.values()}
        if len(seed_sets) != 1:
            raise ValueError(f"mismatched seed sets across solvers on {name}")
        seeds = sorted(next(iter(seed_sets)))
        problem = lookup(name)
        t0 = init_budget if init_budget is not None else 2 * problem.d + 1
        budget = max(
            len(r.iterations) for m in solver_map.values() for r in m.values()
        )

        first_solver = solver_names[0]
        f_start = float(
            np.median(
                [
                    max(
                        penalized_value(problem, np.array(it.x), rho)
                        for it in solver_map[first_solver][s].iterations[:t0]
                    )
                    for s in seeds
                ]
            )
        )
        curves = {
            w: np.median(
                [
                    _rec_values(problem, solver_map[w][s], rho, budget)
                    for s in seeds
                ],
                axis=0,
            )
            for w in solver_names
        }
        f_best = max(curve[-1] for curve in curves.values())
        for w in solver_names:
            passing = np.nonzero(
                [perf_test(v, f_start, f_best, tau) for v in curves[w]]
            )[0]
            pi[(name, w)] = float(passing[0] + 1) if passing.size else np.inf

    max_budget = max(
        len(r.iterations) for m in by_problem.values()
        for sm in m.values() for r in sm.values()
    )
    budgets = np.arange(1, max_budget + 1)
    rho_curves = {
        w: np.array(
            [
                np.mean([pi[(name, w)] <= t for name in problem_names])
                for t in budgets
            ]
        )
        for w in solver_names
    }
    return ProfileTable(
        solvers=solver_names,
        problems=problem_names,
        tau=tau,
        budgets=budgets,
        pi=pi,
        rho=rho_curves,
    )
