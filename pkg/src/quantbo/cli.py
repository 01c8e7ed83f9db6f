"""Command-line surface: run experiment grids, aggregate performance
profiles, and list registered benchmark problems.

Trace files are line-delimited JSON, one iteration per line plus a
summary line, named {problem}__{solver}__seed{k}.jsonl.  All files are
written atomically (temp file in the target directory, then rename).
"""

from __future__ import annotations

import os
import sys
import tempfile
from dataclasses import dataclass, field

import click

from quantbo.acquisition import QuantileConfig
from quantbo.bench import build_profiles
from quantbo.loop import SOLVERS, CuqbConfig, RunRecord, run
from quantbo.optimizer import MultiStartConfig
from quantbo.problems import registry_get, registry_names

DEFAULT_OUT_ENV = "QUANTBO_OUT"


def parse_seeds(text: str):
    """Seed list from '0..9', '0,3,7', or a single integer."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..")
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise ValueError(f"bad seed range {text!r}")
        return tuple(range(lo, hi + 1))
    return tuple(int(v) for v in text.split(",") if v.strip())


def _parse_scalar(value: str):
    value = value.strip()
    if value.lower() in ("true", "false"):
        return value.lower() == "true"
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    return value


def parse_config_file(path: str) -> dict:
    """Flat `key = value` lines; '#' starts a comment; lists are
    comma-separated."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            out[key] = value
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    problems: tuple
    solvers: tuple = ("cuqb",)
    seeds: tuple = (0,)
    noise_std: float = 0.0
    out_dir: str = "."
    loop_overrides: dict = field(default_factory=dict)
    quantile_overrides: dict = field(default_factory=dict)
    multistart_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.problems or not self.solvers or not self.seeds:
            raise ValueError("problems, solvers, and seeds must be non-empty")
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")
        bad = set(self.solvers) - set(SOLVERS)
        if bad:
            raise ValueError(
                f"unknown solvers {sorted(bad)}; valid: {', '.join(SOLVERS)}"
            )

    def cuqb_config(self, seed: int) -> CuqbConfig:
        quantile = QuantileConfig(**self.quantile_overrides)
        multistart = MultiStartConfig(**self.multistart_overrides)
        return CuqbConfig(
            quantile=quantile,
            multistart=multistart,
            noise_std=self.noise_std,
            seed=seed,
            **self.loop_overrides,
        )


_KEY_MAP = {
    "quantile.L": ("quantile_overrides", "mc_samples"),
    "quantile.epsilon": ("quantile_overrides", "epsilon"),
    "quantile.alpha": ("quantile_overrides", "alpha"),
    "quantile.schedule": ("quantile_overrides", "schedule"),
    "quantile.delta": ("quantile_overrides", "delta"),
    "quantile.cardinality": ("quantile_overrides", "domain_cardinality"),
    "loop.rho": ("loop_overrides", "rho"),
    "loop.T0": ("loop_overrides", "init_budget"),
    "loop.T": ("loop_overrides", "total_budget"),
    "loop.infeasibility_check": ("loop_overrides", "infeasibility_check"),
    "loop.fit_restarts": ("loop_overrides", "fit_restarts"),
    "loop.refit_restarts": ("loop_overrides", "refit_restarts"),
    "multistart.n_raw": ("multistart_overrides", "n_raw"),
    "multistart.n_starts": ("multistart_overrides", "n_starts"),
    "multistart.eta": ("multistart_overrides", "eta"),
}


def experiment_from_mapping(raw: dict) -> ExperimentConfig:
    top = {
        "loop_overrides": {},
        "quantile_overrides": {},
        "multistart_overrides": {},
    }
    for key, value in raw.items():
        if key == "problems":
            top["problems"] = tuple(v.strip() for v in value.split(","))
        elif key == "solvers":
            top["solvers"] = tuple(v.strip() for v in value.split(","))
        elif key == "seeds":
            top["seeds"] = parse_seeds(value)
        elif key == "noise_std":
            top["noise_std"] = float(value)
        elif key == "out":
            top["out_dir"] = value
        elif key in _KEY_MAP:
            group, name = _KEY_MAP[key]
            top[group][name] = _parse_scalar(value)
        else:
            raise ValueError(f"unknown config key {key!r}")
    if "problems" not in top:
        raise ValueError("config must set 'problems'")
    return ExperimentConfig(**top)


def atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def trace_filename(problem: str, solver: str, seed: int) -> str:
    return f"{problem}__{solver}__seed{seed}.jsonl"


def _execute_cell(args):
    problem_name, solver, seed, exp = args
    problem = registry_get(problem_name)
    try:
        record = run(problem, exp.cuqb_config(seed), solver=solver)
        return problem_name, solver, seed, record, None
    except Exception as exc:  # noqa: BLE001 - reported per cell
        return problem_name, solver, seed, None, f"{type(exc).__name__}: {exc}"


@click.group()
def main():
    """Constrained Bayesian optimization experiment harness."""


@main.command("list-problems")
def cmd_list_problems():
    """Print the registered benchmark problems."""
    header = f"{'name':<16} {'d':>3} {'m':>3} {'n':>3}  optimum"
    click.echo(header)
    click.echo("-" * len(header))
    for name in sorted(registry_names()):
        p = registry_get(name)
        opt = "unknown" if p.known_optimum is None else f"{p.known_optimum:g}"
        click.echo(f"{name:<16} {p.d:>3} {p.m:>3} {p.n:>3}  {opt}")


def _solver_choice():
    return click.Choice(SOLVERS)


@main.command("run")
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="flat key = value config file")
@click.option("--problem", "problems", multiple=True)
@click.option("--solver", "solvers", multiple=True, type=_solver_choice())
@click.option("--seed", "seed", type=int, default=None)
@click.option("--seeds", "seeds_text", default=None,
              help="'0..9' or comma-separated list")
@click.option("--noise-std", type=float, default=None)
@click.option("--L", "mc_samples", type=int, default=None,
              help="Monte Carlo sample count")
@click.option("--epsilon", type=float, default=None,
              help="soft-sort regularization")
@click.option("--alpha", type=float, default=None, help="quantile level")
@click.option("--rho", type=float, default=None, help="penalty weight")
@click.option("--T0", "init_budget", type=int, default=None,
              help="initial design size (default 2d+1)")
@click.option("--T", "--budget", "total_budget", type=int, default=None,
              help="total evaluation budget")
@click.option("--infeasibility-check/--no-infeasibility-check", default=None)
@click.option("--jobs", type=int, default=1, help="worker processes")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              envvar=DEFAULT_OUT_ENV)
def cmd_run(config_path, problems, solvers, seed, seeds_text, noise_std,
            mc_samples, epsilon, alpha, rho, init_budget, total_budget,
            infeasibility_check, jobs, out_dir):
    """Execute a grid of seeded runs and write one trace per cell."""
    raw = parse_config_file(config_path) if config_path else {}
    try:
        merged = dict(raw)
        if problems:
            merged["problems"] = ",".join(problems)
        if solvers:
            merged["solvers"] = ",".join(solvers)
        if seeds_text is not None:
            merged["seeds"] = seeds_text
        elif seed is not None:
            merged["seeds"] = str(seed)
        if noise_std is not None:
            merged["noise_std"] = str(noise_std)
        if out_dir is not None:
            merged["out"] = out_dir
        flag_overrides = {
            "quantile.L": mc_samples,
            "quantile.epsilon": epsilon,
            "quantile.alpha": alpha,
            "loop.rho": rho,
            "loop.T0": init_budget,
            "loop.T": total_budget,
            "loop.infeasibility_check": infeasibility_check,
        }
        for key, value in flag_overrides.items():
            if value is not None:
                merged[key] = str(value)
        exp = experiment_from_mapping(merged)
        for name in exp.problems:
            registry_get(name)
    except (ValueError, KeyError) as exc:
        raise click.UsageError(str(exc)) from exc

    os.makedirs(exp.out_dir, exist_ok=True)
    cells = [
        (p, w, s, exp) for p in exp.problems for w in exp.solvers
        for s in exp.seeds
    ]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_execute_cell, cells))
    else:
        results = [_execute_cell(cell) for cell in cells]

    failures = []
    summary_lines = ["problem,solver,seed,status,rec_index"]
    for problem_name, solver, s, record, error in results:
        if error is not None:
            failures.append((problem_name, solver, s, error))
            summary_lines.append(f"{problem_name},{solver},{s},failed,")
            continue
        path = os.path.join(exp.out_dir, trace_filename(problem_name, solver, s))
        atomic_write(path, record.to_jsonl())
        summary_lines.append(
            f"{problem_name},{solver},{s},{record.status},{record.rec_index}"
        )
        if record.status != "completed":
            failures.append(
                (problem_name, solver, s, f"status {record.status}")
            )
    atomic_write(
        os.path.join(exp.out_dir, "summary.csv"), "\n".join(summary_lines) + "\n"
    )
    click.echo("\n".join(summary_lines))
    if failures:
        for problem_name, solver, s, error in failures:
            click.echo(
                f"failed: {problem_name}/{solver}/seed{s}: {error}", err=True
            )
        sys.exit(1)


@main.command("profile")
@click.argument("trace_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--tau", type=float, default=0.01)
@click.option("--rho", type=float, default=1e5)
@click.option("--T0", "init_budget", type=int, default=None,
              help="initial design size used by the runs (default 2d+1)")
@click.option("--out", "out_path", type=click.Path(), default=None)
def cmd_profile(trace_dir, tau, rho, init_budget, out_path):
    """Aggregate a trace directory into a performance-profile table."""
    names = sorted(f for f in os.listdir(trace_dir) if f.endswith(".jsonl"))
    if not names:
        raise click.ClickException(f"no trace files in {trace_dir}")
    records = []
    for name in names:
        with open(os.path.join(trace_dir, name)) as fh:
            records.append(RunRecord.from_jsonl(fh.read()))
    try:
        table = build_profiles(records, tau=tau, rho=rho,
                               init_budget=init_budget)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    text = table.to_csv()
    if out_path is None:
        out_path = os.path.join(trace_dir, "profiles.csv")
    atomic_write(out_path, text)
    click.echo(text, nl=False)


if __name__ == "__main__":
    main()
