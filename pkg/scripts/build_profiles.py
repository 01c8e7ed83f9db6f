"""Aggregate a directory of run traces into a performance-profile CSV.

Usage: python3 scripts/build_profiles.py trace_dir [--tau 0.01]
"""

import argparse
import os
import sys

from quantbo.bench import build_profiles
from quantbo.cli import atomic_write
from quantbo.loop import RunRecord


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("trace_dir")
    ap.add_argument("--tau", type=float, default=0.01)
    ap.add_argument("--rho", type=float, default=1e5)
    ap.add_argument("--T0", type=int, default=None)
    ap.add_argument("--out", default=None)
    args = ap.parse_args(argv)
    records = []
    for name in sorted(os.listdir(args.trace_dir)):
        if name.endswith(".jsonl"):
            with open(os.path.join(args.trace_dir, name)) as fh:
                records.append(RunRecord.from_jsonl(fh.read()))
    if not records:
        print(f"no trace files in {args.trace_dir}", file=sys.stderr)
        return 1
    table = build_profiles(records, tau=args.tau, rho=args.rho,
                           init_budget=args.T0)
    out = args.out or os.path.join(args.trace_dir, "profiles.csv")
    atomic_write(out, table.to_csv())
    print(table.to_csv(), end="")
    return 0


if __name__ == "__main__":
    sys.exit(main())
