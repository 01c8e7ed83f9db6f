"""Benchmark suite presets and a trace cache shared by the experiment
scripts and the long-running end-to-end tests.

Traces are stored one file per (suite, problem, solver, seed) cell; a
cached file is reused only when its config hash matches the preset, so
stale caches are re-run rather than silently trusted.
"""

from __future__ import annotations

import json
import os

from quantbo.acquisition import QuantileConfig
from quantbo.loop import CuqbConfig, RunRecord, run
from quantbo.problems import infeasible_toy, registry_get

UNCONSTRAINED = (
    "booth", "wolfe", "rastrigin", "colville", "friedman", "dolan",
    "rosenbrock", "zakharov", "powell", "styblinski-tang",
)
CONSTRAINED = ("bazaraa", "ex314", "rosen-suzuki", "ex211")
BASELINE_SOLVERS = ("eic", "eic-cf", "epbo", "random")
SEEDS = tuple(range(10))


def default_config(seed: int, noise_std: float = 0.0, **kw) -> CuqbConfig:
    return CuqbConfig(seed=seed, noise_std=noise_std, **kw)


def theoretical_config(seed: int, **kw) -> CuqbConfig:
    """Shrinking-level configuration used for infeasibility detection."""
    return CuqbConfig(
        quantile=QuantileConfig(
            schedule="theoretical", delta=0.05, domain_cardinality=1e4
        ),
        infeasibility_check=True,
        seed=seed,
        **kw,
    )


def _problem_for(name: str):
    if name == "infeasible-toy":
        return infeasible_toy()
    return registry_get(name)


def suite_cells():
    """All (suite, problem, solver, config) cells the end-to-end checks
    consume, in a cheap-first order."""
    cells = []
    for seed in SEEDS:
        cells.append(("infeasible", "infeasible-toy", "cuqb",
                      theoretical_config(seed)))
    for seed in SEEDS:
        cells.append(("feasible-check", "bazaraa", "cuqb",
                      theoretical_config(seed)))
    for name in CONSTRAINED:
        for seed in SEEDS:
            cells.append(("constrained", name, "cuqb", default_config(seed)))
    for seed in SEEDS:
        cells.append(("env", "env-model", "cuqb", default_config(seed)))
    for seed in SEEDS:
        cells.append(("wo-noise", "williams-otto", "cuqb",
                      default_config(seed, noise_std=0.05)))
    for name in UNCONSTRAINED:
        for seed in SEEDS:
            cells.append(("unconstrained", name, "cuqb", default_config(seed)))
    for solver in BASELINE_SOLVERS:
        for name in UNCONSTRAINED:
            for seed in SEEDS:
                cells.append(("unconstrained", name, solver,
                              default_config(seed)))
    return cells


def default_cache_dir() -> str:
    env = os.environ.get("QUANTBO_CACHE")
    if env:
        return env
    root = os.path.dirname(os.path.dirname(os.path.dirname(__file__)))
    return os.path.join(root, ".cache", "acceptance")


def cell_path(cache_dir: str, suite: str, problem: str, solver: str,
              seed: int) -> str:
    return os.path.join(cache_dir, suite,
                        f"{problem}__{solver}__seed{seed}.jsonl")


def run_or_load(suite: str, problem_name: str, solver: str, cfg: CuqbConfig,
                cache_dir: str | None = None) -> RunRecord:
    """Load the cached trace for a cell, or run it and cache the result."""
    if cache_dir is None:
        cache_dir = default_cache_dir()
    path = cell_path(cache_dir, suite, problem_name, solver, cfg.seed)
    want_hash = cfg.config_hash()
    if os.path.exists(path):
        with open(path) as fh:
            record = RunRecord.from_jsonl(fh.read())
        if record.config_hash == want_hash and record.solver == solver:
            return record
    record = run(_problem_for(problem_name), cfg, solver=solver)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(record.to_jsonl())
    os.replace(tmp, path)
    return record


def load_summary(cache_dir: str | None = None) -> dict:
    """Completion state of the cell grid: {done, missing}."""
    if cache_dir is None:
        cache_dir = default_cache_dir()
    done, missing = [], []
    for suite, name, solver, cfg in suite_cells():
        path = cell_path(cache_dir, suite, name, solver, cfg.seed)
        (done if os.path.exists(path) else missing).append(
            (suite, name, solver, cfg.seed)
        )
    return {"done": done, "missing": missing}
