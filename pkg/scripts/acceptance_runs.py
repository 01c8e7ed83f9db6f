"""Fill the trace cache consumed by the end-to-end test suite.

Idempotent: cells whose trace file already exists with a matching config
hash are skipped, so the script can be interrupted and re-invoked until
the grid is complete.

Usage: python3 scripts/acceptance_runs.py [--max-cells N] [--suite NAME]
"""

import argparse
import os
import sys
import time

from quantbo.presets import (
    cell_path,
    default_cache_dir,
    load_summary,
    run_or_load,
    suite_cells,
)


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-cells", type=int, default=None,
                    help="stop after completing this many new cells")
    ap.add_argument("--suite", default=None, help="only run this suite")
    args = ap.parse_args(argv)

    cache = default_cache_dir()
    state = load_summary(cache)
    print(f"{len(state['done'])} cells cached, "
          f"{len(state['missing'])} missing", flush=True)
    completed = 0
    for suite, name, solver, cfg in suite_cells():
        if args.suite and suite != args.suite:
            continue
        if os.path.exists(cell_path(cache, suite, name, solver, cfg.seed)):
            continue
        tic = time.time()
        record = run_or_load(suite, name, solver, cfg, cache_dir=cache)
        completed += 1
        print(f"{suite}/{name}/{solver}/seed{cfg.seed}: "
              f"{record.status} in {time.time() - tic:.1f}s "
              f"({completed} new)", flush=True)
        if args.max_cells and completed >= args.max_cells:
            break
    state = load_summary()
    print(f"done: {len(state['done'])} cached, "
          f"{len(state['missing'])} missing", flush=True)
    return 0 if not state["missing"] else 2


if __name__ == "__main__":
    sys.exit(main())
