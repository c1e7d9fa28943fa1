"""Axis derivative tables for every builtin, one CSV per candidate.

    python scripts/axis_curves.py [outdir] [--kmax 8]

Columns match ``cfprobe axis-dump``.  Rows whose cell is inconclusive are
kept; filter on ``error_bound`` when plotting.
"""

import argparse
from pathlib import Path

from cfprobe.cli import RunConfig, axis_csv
from cfprobe.criteria import CheckPolicy
from cfprobe.funcmodel import BUILTIN_CATALOG, catalog_entry


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("outdir", nargs="?", default="axis_curves")
    ap.add_argument("--kmax", type=int, default=8)
    ap.add_argument("--jobs", type=int, default=4)
    args = ap.parse_args()
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for name in BUILTIN_CATALOG:
        cfg = RunConfig(("builtin", name), ("theorem2",), (), CheckPolicy(k_max=args.kmax), jobs=args.jobs)
        path = out / (name.replace("(", "_").replace(")", "") + ".csv")
        path.write_text(axis_csv(catalog_entry(name).candidate, cfg))
        print(path)


if __name__ == "__main__":
    main()
