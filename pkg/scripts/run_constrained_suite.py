"""Run the constrained benchmark subset over 10 seeds and report the
median penalized value of the final recommendation per problem.

Usage: python3 scripts/run_constrained_suite.py [out_dir]
"""

import argparse
import os
import sys

import numpy as np

from quantbo.bench import penalized_value
from quantbo.cli import atomic_write, trace_filename
from quantbo.loop import CuqbConfig, run
from quantbo.problems import registry_get

CONSTRAINED = ("bazaraa", "ex314", "rosen-suzuki", "ex211")


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("out_dir", nargs="?", default="results/constrained")
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--budget", type=int, default=100)
    args = ap.parse_args(argv)
    os.makedirs(args.out_dir, exist_ok=True)
    for name in CONSTRAINED:
        problem = registry_get(name)
        finals = []
        for seed in range(args.seeds):
            cfg = CuqbConfig(seed=seed, total_budget=args.budget)
            record = run(problem, cfg, solver="cuqb")
            path = os.path.join(args.out_dir, trace_filename(name, "cuqb", seed))
            atomic_write(path, record.to_jsonl())
            finals.append(penalized_value(problem, record.rec_x, cfg.rho))
        print(f"{name}: median recommended penalized value "
              f"{np.median(finals):.4f} (optimum {problem.known_optimum})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
