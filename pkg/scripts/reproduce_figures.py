"""Write the data behind every figure dataset to a directory of CSV files.

    python3 scripts/reproduce_figures.py out/ --workers 4

fig4 (120 x 120 phase diagram) dominates the runtime; pass --skip fig4 to omit it.
"""

import argparse
import sys
import time
from pathlib import Path

from rtn_dephasing.cli import FIGURES, run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("outdir", type=Path)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--skip", nargs="*", default=[], choices=FIGURES)
    args = ap.parse_args()
    args.outdir.mkdir(parents=True, exist_ok=True)
    status = 0
    for fig in FIGURES:
        if fig in args.skip:
            continue
        start = time.perf_counter()
        code = run(["reproduce", fig, "--workers", str(args.workers), "-o", str(args.outdir / f"{fig}.csv")])
        print(f"{fig}: exit {code} in {time.perf_counter() - start:.1f}s", file=sys.stderr)
        status = status or code
    return status


if __name__ == "__main__":
    sys.exit(main())
