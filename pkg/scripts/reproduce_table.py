"""Recompute the table of T_(j,k) and compare it with the reference values."""

import argparse
import time

from treehomology.cli import REFERENCE_TABLE, SKIPPED, JobConfig, compute_table
from treehomology.exactlinalg import AbelianGroup


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--jmax", type=int, default=6)
    ap.add_argument("--kmax", type=int, default=6)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--cache-dir", default=None)
    ap.add_argument("--budget-secs", type=float, default=None)
    args = ap.parse_args()
    cfg = JobConfig("table", "text", args.cache_dir, args.jobs, args.budget_secs)
    start = time.monotonic()
    cells = compute_table(cfg, 2, args.jmax, 2, args.kmax)
    mismatches = 0
    for (j, k), v in sorted(cells.items()):
        ref = REFERENCE_TABLE.get((j, k))
        if v == SKIPPED:
            status = "skipped"
        elif ref is None:
            status = "no reference"
        elif AbelianGroup.parse(v) == ref:
            status = "ok"
        else:
            status = f"MISMATCH (expected {ref})"
            mismatches += 1
        print(f"T_({j},{k}) = {v:<16} {status}")
    print(f"{len(cells)} cells, {mismatches} mismatches, {time.monotonic() - start:.1f}s")
    return 1 if mismatches else 0


if __name__ == "__main__":
    raise SystemExit(main())
