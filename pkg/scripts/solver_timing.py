"""Wall time per solve for each scheme on the first N draws of the reference network."""

import argparse
import time

from noma_ee.config import Algorithm, NetworkConfig, Scenario
from noma_ee.montecarlo import run_once

SCHEMES = {
    "jtcn-global": (Scenario.JTCN, Algorithm.GLOBAL),
    "noma-global": (Scenario.NOMA, Algorithm.GLOBAL),
    "noma-ilo": (Scenario.NOMA, Algorithm.ILO),
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--runs", type=int, default=20)
    ap.add_argument("--r-min", type=float, default=1.5e6)
    args = ap.parse_args()
    cfg = NetworkConfig(r_min=args.r_min)
    for name, (scenario, algorithm) in SCHEMES.items():
        t = time.perf_counter()
        results = [run_once(cfg, s, scenario, algorithm) for s in range(1, args.runs + 1)]
        dt = (time.perf_counter() - t) / args.runs
        newton = sum(r.outcome.inner_iterations for r in results if r.feasible)
        n_ok = sum(r.feasible for r in results)
        print(f"{name:12s} {dt:.3f} s/solve, {n_ok}/{args.runs} feasible, {newton / max(n_ok, 1):.0f} Newton steps/solve")


if __name__ == "__main__":
    main()
