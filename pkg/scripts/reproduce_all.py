"""Regenerate the CSV data for every figure preset into OUT/<figure>/.

    python scripts/reproduce_all.py --runs 100 --out out
"""

import argparse
import sys
import time
from pathlib import Path

from noma_ee.cli import FIGURES, main


def run() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("out"))
    ap.add_argument("figures", nargs="*", default=sorted(FIGURES))
    args = ap.parse_args()
    for fig in args.figures:
        t = time.perf_counter()
        print(f"== {fig}")
        code = main(
            ["reproduce", fig, "--runs", str(args.runs), "--jobs", str(args.jobs), "--seed", str(args.seed), "--out", str(args.out / fig)]
        )
        if code:
            return code
        print(f"   {time.perf_counter() - t:.0f} s")
    return 0


if __name__ == "__main__":
    sys.exit(run())
