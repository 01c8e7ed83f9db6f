"""Sequential optimization loop: initial design, infeasibility detection,
acquisition maximization, observation, refit, and recommendation.

The default solver maximizes the penalized upper quantile bound of the
composite objective (cuqb); black-box (eic, epbo) and composite (eic-cf)
baselines plus uniform random search share the same harness.  Runs are
deterministic per seed and serialize to line-delimited JSON traces.

Recommendations follow the penalized *lower* quantile rule: each queried
point is scored once, with the surrogate available at its selection time
and one fixed evaluation z-matrix, and the best score so far is carried
forward.  This is equivalent to storing per-iteration model snapshots
and scoring at the end, at constant cost per iteration.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field, replace, asdict

import numpy as np
from scipy.special import ndtri

from quantbo.acquisition import (
    QuantileConfig,
    eic_acquisition,
    eic_acquisition_batch,
    eic_cf_acquisition,
    eic_cf_acquisition_batch,
    epbo_acquisition,
    epbo_acquisition_batch,
    lower_quantile,
    quantile_bound_batch,
    upper_quantile,
)
from quantbo.gp import Dataset, GpSurrogate, NumericalError
from quantbo.optimizer import MultiStartConfig, maximize_penalized

SOLVERS = ("cuqb", "eic", "eic-cf", "epbo", "random")


class LoopError(RuntimeError):
    pass


@dataclass(frozen=True)
class CuqbConfig:
    """Loop hyperparameters; init_budget None means 2d+1."""

    quantile: QuantileConfig = field(default_factory=QuantileConfig)
    multistart: MultiStartConfig = field(default_factory=MultiStartConfig)
    rho: float = 1e5
    init_budget: int | None = None
    total_budget: int = 100
    noise_std: float = 0.0
    infeasibility_check: bool = False
    fit_restarts: int = 8
    refit_restarts: int = 2
    seed: int = 0

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if self.total_budget < 1:
            raise ValueError("total_budget must be positive")
        if self.init_budget is not None and self.init_budget < 1:
            raise ValueError("init_budget must be positive")
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")

    def resolved_init_budget(self, d: int) -> int:
        t0 = 2 * d + 1 if self.init_budget is None else self.init_budget
        if t0 >= self.total_budget:
            raise ValueError(
                f"init budget {t0} must be below total budget {self.total_budget}"
            )
        return t0

    def to_dict(self) -> dict:
        out = asdict(self)
        out["quantile"] = asdict(self.quantile)
        out["multistart"] = asdict(self.multistart)
        return out

    def config_hash(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class IterationRecord:
    t: int
    x: tuple
    y: tuple
    acq_value: float | None
    infeasible_flag: bool
    rec_index: int
    rec_x: tuple
    # wall-clock varies run to run; keep it out of equality so traces of
    # identical seeded runs compare equal
    elapsed_ms: float = field(compare=False, default=0.0)

    def to_json_obj(self) -> dict:
        return {
            "t": self.t,
            "x": list(self.x),
            "y": list(self.y),
            "acq_value": self.acq_value,
            "infeasible_flag": self.infeasible_flag,
            "rec_index": self.rec_index,
            "rec_x": list(self.rec_x),
            "elapsed_ms": self.elapsed_ms,
        }

    @staticmethod
    def from_json_obj(obj: dict) -> "IterationRecord":
        return IterationRecord(
            t=int(obj["t"]),
            x=tuple(obj["x"]),
            y=tuple(obj["y"]),
            acq_value=obj["acq_value"],
            infeasible_flag=bool(obj["infeasible_flag"]),
            rec_index=int(obj["rec_index"]),
            rec_x=tuple(obj["rec_x"]),
            elapsed_ms=float(obj["elapsed_ms"]),
        )


@dataclass(frozen=True)
class RunRecord:
    problem: str
    solver: str
    seed: int
    status: str  # "completed" | "infeasible"
    config_hash: str
    iterations: tuple
    declared_at: int | None = None
    declared_constraint: int | None = None

    @property
    def rec_index(self) -> int:
        return self.iterations[-1].rec_index

    @property
    def rec_x(self) -> np.ndarray:
        return np.array(self.iterations[-1].rec_x)

    def queried(self) -> np.ndarray:
        return np.array([it.x for it in self.iterations])

    def observed(self) -> np.ndarray:
        return np.array([it.y for it in self.iterations])

    def to_jsonl(self) -> str:
        lines = [json.dumps(it.to_json_obj()) for it in self.iterations]
        lines.append(
            json.dumps(
                {
                    "status": self.status,
                    "seed": self.seed,
                    "config_hash": self.config_hash,
                    "problem": self.problem,
                    "solver": self.solver,
                    "declared_at": self.declared_at,
                    "declared_constraint": self.declared_constraint,
                }
            )
        )
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_jsonl(text: str) -> "RunRecord":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty trace")
        summary = json.loads(lines[-1])
        iters = tuple(
            IterationRecord.from_json_obj(json.loads(ln)) for ln in lines[:-1]
        )
        return RunRecord(
            problem=summary["problem"],
            solver=summary["solver"],
            seed=int(summary["seed"]),
            status=summary["status"],
            config_hash=summary["config_hash"],
            iterations=iters,
            declared_at=summary.get("declared_at"),
            declared_constraint=summary.get("declared_constraint"),
        )


# -- building blocks ------------------------------------------------------


def initial_design(box, t0: int, seed: int) -> np.ndarray:
    """t0 uniform points in the box, deterministic per seed."""
    box = np.asarray(box, dtype=float)
    rng = np.random.default_rng(seed)
    return rng.uniform(box[:, 0], box[:, 1], size=(t0, box.shape[0]))


def _ms_for(cfg: CuqbConfig, t: int, tag: int = 0) -> MultiStartConfig:
    return replace(cfg.multistart, seed=cfg.multistart.seed + 7919 * t + tag)


def check_infeasibility(model, problem, cfg: CuqbConfig, t: int, z):
    """Index (1-based) of the first constraint whose maximized upper
    quantile bound is negative, else None."""
    n = problem.n
    _, p_hi = cfg.quantile.levels(t, n)
    for i in range(1, n + 1):
        g = problem.outers[i]

        def surface(x, g=g):
            return upper_quantile(g, x, model, cfg.quantile, t, z, n)

        def batch(X, g=g):
            return quantile_bound_batch(g, X, model, cfg.quantile, p_hi, z)

        _, best = maximize_penalized(
            surface, problem.box, _ms_for(cfg, t, tag=i), surface_batch=batch
        )
        if best < 0:
            return i
    return None


def _cuqb_surfaces(model, problem, cfg: CuqbConfig, t: int, z):
    n = problem.n
    qcfg = cfg.quantile
    _, p_hi = qcfg.levels(t, n)

    def surface(x):
        val, grad = upper_quantile(problem.outers[0], x, model, qcfg, t, z, n)
        for g in problem.outers[1:]:
            u, du = upper_quantile(g, x, model, qcfg, t, z, n)
            if u < 0:
                val += cfg.rho * u
                grad = grad + cfg.rho * du
        return val, grad

    def batch(X):
        tot = quantile_bound_batch(problem.outers[0], X, model, qcfg, p_hi, z)
        for g in problem.outers[1:]:
            u = quantile_bound_batch(g, X, model, qcfg, p_hi, z)
            tot = tot - cfg.rho * np.maximum(-u, 0.0)
        return tot

    return surface, batch


def cuqb_step(model, problem, cfg: CuqbConfig, t: int, z):
    """Next query point maximizing the penalized upper quantile bound."""
    surface, batch = _cuqb_surfaces(model, problem, cfg, t, z)
    return maximize_penalized(
        surface, problem.box, _ms_for(cfg, t), surface_batch=batch
    )


def penalized_lower_score(problem, x, model, cfg: CuqbConfig, t: int, z):
    """l_0(x) - rho sum [-l_i(x)]^+ under the given surrogate."""
    n = problem.n
    val, _ = lower_quantile(problem.outers[0], x, model, cfg.quantile, t, z, n)
    for g in problem.outers[1:]:
        low, _ = lower_quantile(g, x, model, cfg.quantile, t, z, n)
        if low < 0:
            val += cfg.rho * low
    return float(val)


def recommend(problem, xs, models, cfg: CuqbConfig, z, ts=None):
    """Best queried point by penalized lower quantile score.

    xs[i] is scored against models[i], the surrogate available when the
    point was selected.  Returns (t_star, x_star) with t_star 1-based.
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    if len(xs) == 0:
        raise ValueError("need at least one queried point")
    if ts is None:
        ts = list(range(len(xs)))
    scores = [
        penalized_lower_score(problem, x, mdl, cfg, t, z)
        for x, mdl, t in zip(xs, models, ts)
    ]
    t_star = int(np.argmax(scores)) + 1
    return t_star, xs[t_star - 1]


def find_rho(model, problem, cfg: CuqbConfig, z):
    """Doubling search for a penalty weight that caps the penalized upper
    bound surface by a feasible lower bound on the optimum; None when the
    search is inapplicable (no constraints, or no point with all lower
    constraint bounds non-negative)."""
    n = problem.n
    if n == 0:
        return None
    qcfg = cfg.quantile
    t = 0
    p_lo, p_hi = qcfg.levels(t, n)
    big = 1e8

    def l_surface(x):
        val, grad = lower_quantile(problem.outers[0], x, model, qcfg, t, z, n)
        for g in problem.outers[1:]:
            low, dl = lower_quantile(g, x, model, qcfg, t, z, n)
            if low < 0:
                val += big * low
                grad = grad + big * dl
        return val, grad

    def l_batch(X):
        tot = quantile_bound_batch(problem.outers[0], X, model, qcfg, p_lo, z)
        for g in problem.outers[1:]:
            low = quantile_bound_batch(g, X, model, qcfg, p_lo, z)
            tot = tot - big * np.maximum(-low, 0.0)
        return tot

    x_best, l_star = maximize_penalized(
        l_surface, problem.box, _ms_for(cfg, 0, tag=101), surface_batch=l_batch
    )
    mins = min(
        float(lower_quantile(g, x_best, model, qcfg, t, z, n)[0])
        for g in problem.outers[1:]
    )
    if mins < -1e-6:
        return None

    for k in range(41):
        rho = float(2**k)
        trial = replace(cfg, rho=rho)
        surface, batch = _cuqb_surfaces(model, problem, trial, t, z)
        _, lhs = maximize_penalized(
            surface, problem.box, _ms_for(cfg, 0, tag=102 + k),
            surface_batch=batch,
        )
        if lhs <= l_star + 1e-9:
            return rho
    return None


# -- full runs ------------------------------------------------------------


def _fit(data, cfg: CuqbConfig, warm=None):
    restarts = cfg.refit_restarts if warm is not None else cfg.fit_restarts
    try:
        return GpSurrogate.fit_mle(
            data, restarts=restarts, seed=cfg.seed, warm_start=warm
        )
    except NumericalError:
        if warm is None:
            raise
    try:
        return GpSurrogate.fit_mle(data, restarts=cfg.fit_restarts, seed=cfg.seed)
    except NumericalError as exc:
        raise LoopError(
            f"surrogate refit failed at {data.count} points: {exc}"
        ) from exc


def _naive_penalized(problem, x, y, rho) -> float:
    vals = problem.compose(x, y)
    return float(vals[0] - rho * np.sum(np.maximum(-vals[1:], 0.0)))


def run(problem, cfg: CuqbConfig, solver: str = "cuqb") -> RunRecord:
    """Execute one seeded optimization run and return its trace."""
    if solver not in SOLVERS:
        raise ValueError(f"unknown solver {solver!r}; valid: {SOLVERS}")
    d, m, n = problem.d, problem.m, problem.n
    box = problem.box
    t0 = cfg.resolved_init_budget(d)
    qcfg = cfg.quantile
    noise_rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 1)))
    z_rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 2)))
    rand_rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 3)))

    def observe(x):
        y = np.asarray(problem.blackbox(x), dtype=float)
        if cfg.noise_std > 0:
            y = y + noise_rng.normal(0.0, cfg.noise_std, size=m)
        return y

    start = time.perf_counter()
    xs = list(initial_design(box, t0, cfg.seed))
    ys = [observe(x) for x in xs]

    black_box_solver = solver in ("eic", "epbo")

    def outputs():
        if black_box_solver:
            return np.array([problem.compose(x, y) for x, y in zip(xs, ys)])
        return np.array(ys)

    model = None
    if solver != "random":
        model = _fit(Dataset(np.array(xs), outputs()), cfg)

    z_rec = qcfg.draw_z(z_rng, m)
    # Each point is scored once, with the surrogate in hand when it was
    # chosen; the running argmax is the recommendation.
    best_score, best_index = -np.inf, 1
    records = []

    def score_point(i, x, y, t):
        nonlocal best_score, best_index
        if solver == "cuqb":
            s = penalized_lower_score(problem, x, model, cfg, t, z_rec)
        else:
            s = _naive_penalized(problem, x, y, cfg.rho)
        if s > best_score:
            best_score, best_index = s, i
        return s

    init_elapsed = (time.perf_counter() - start) * 1000.0 / t0
    for i, (x, y) in enumerate(zip(xs, ys), start=1):
        score_point(i, x, y, t0)
        records.append(
            IterationRecord(
                t=i,
                x=tuple(float(v) for v in x),
                y=tuple(float(v) for v in y),
                acq_value=None,
                infeasible_flag=False,
                rec_index=best_index,
                rec_x=tuple(float(v) for v in xs[best_index - 1]),
                elapsed_ms=init_elapsed,
            )
        )

    status = "completed"
    declared_at = None
    declared_constraint = None

    for t in range(t0, cfg.total_budget):
        tic = time.perf_counter()
        z = qcfg.draw_z(z_rng, m)
        infeasible_flag = False
        if solver == "cuqb" and cfg.infeasibility_check and n > 0:
            bad = check_infeasibility(model, problem, cfg, t, z)
            if bad is not None:
                status = "infeasible"
                declared_at = t
                declared_constraint = bad
                records.append(
                    IterationRecord(
                        t=t + 1,
                        x=tuple(records[-1].x),
                        y=tuple(records[-1].y),
                        acq_value=None,
                        infeasible_flag=True,
                        rec_index=best_index,
                        rec_x=tuple(float(v) for v in xs[best_index - 1]),
                        elapsed_ms=(time.perf_counter() - tic) * 1000.0,
                    )
                )
                break

        if solver == "cuqb":
            x_next, acq = cuqb_step(model, problem, cfg, t, z)
        elif solver == "random":
            x_next = rand_rng.uniform(box[:, 0], box[:, 1])
            acq = None
        else:
            x_next, acq = _baseline_step(model, problem, cfg, solver, t, z, xs, ys)

        y_next = observe(x_next)
        xs.append(x_next)
        ys.append(y_next)
        # cuqb scores with the pre-update model, matching the rule that
        # point t is judged by the surrogate that selected it
        score_point(len(xs), x_next, y_next, t)
        if solver != "random":
            model = _fit(Dataset(np.array(xs), outputs()), cfg, warm=model.hypers)
        records.append(
            IterationRecord(
                t=len(xs),
                x=tuple(float(v) for v in x_next),
                y=tuple(float(v) for v in y_next),
                acq_value=None if acq is None else float(acq),
                infeasible_flag=infeasible_flag,
                rec_index=best_index,
                rec_x=tuple(float(v) for v in xs[best_index - 1]),
                elapsed_ms=(time.perf_counter() - tic) * 1000.0,
            )
        )

    return RunRecord(
        problem=problem.name,
        solver=solver,
        seed=cfg.seed,
        status=status,
        config_hash=cfg.config_hash(),
        iterations=tuple(records),
        declared_at=declared_at,
        declared_constraint=declared_constraint,
    )


def _baseline_step(model, problem, cfg: CuqbConfig, solver: str, t: int, z,
                   xs, ys):
    n = problem.n
    fs = np.array([problem.compose(x, y) for x, y in zip(xs, ys)])
    feasible = np.all(fs[:, 1:] >= 0, axis=1) if n > 0 else np.ones(len(fs), bool)
    if feasible.any():
        incumbent = float(fs[feasible, 0].max())
    else:
        incumbent = float(fs[:, 0].min())

    if solver == "eic":
        def surface(x):
            return eic_acquisition(model, incumbent, x, need_grad=True)

        def batch(X):
            return eic_acquisition_batch(model, incumbent, X)

    elif solver == "epbo":
        beta_sqrt = float(ndtri(cfg.quantile.levels(t, n)[1]))

        def surface(x):
            return epbo_acquisition(model, cfg.rho, beta_sqrt, x, need_grad=True)

        def batch(X):
            return epbo_acquisition_batch(model, cfg.rho, beta_sqrt, X)

    else:  # eic-cf
        g_all = problem.outers

        def surface(x):
            return eic_cf_acquisition(
                model, g_all, incumbent, cfg.quantile, z, x, need_grad=True
            )

        def batch(X):
            return eic_cf_acquisition_batch(
                model, g_all, incumbent, cfg.quantile, z, X
            )

    return maximize_penalized(
        surface, problem.box, _ms_for(cfg, t), surface_batch=batch
    )
