"""Run the 10 unconstrained benchmark problems with the default solver
settings over 10 seeds and write traces to the output directory.

Usage: python3 scripts/run_unconstrained_suite.py [out_dir] [--solvers s1,s2]
"""

import argparse
import os
import sys

from quantbo.cli import atomic_write, trace_filename
from quantbo.loop import CuqbConfig, run
from quantbo.problems import registry_get

UNCONSTRAINED = (
    "booth", "wolfe", "rastrigin", "colville", "friedman", "dolan",
    "rosenbrock", "zakharov", "powell", "styblinski-tang",
)


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("out_dir", nargs="?", default="results/unconstrained")
    ap.add_argument("--solvers", default="cuqb")
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--budget", type=int, default=100)
    args = ap.parse_args(argv)
    os.makedirs(args.out_dir, exist_ok=True)
    for name in UNCONSTRAINED:
        problem = registry_get(name)
        for solver in args.solvers.split(","):
            for seed in range(args.seeds):
                cfg = CuqbConfig(seed=seed, total_budget=args.budget)
                record = run(problem, cfg, solver=solver)
                path = os.path.join(
                    args.out_dir, trace_filename(name, solver, seed)
                )
                atomic_write(path, record.to_jsonl())
                print(f"{name}/{solver}/seed{seed}: rec {record.rec_index}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
