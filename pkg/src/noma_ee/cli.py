"""Command-line entry point: ``python -m noma_ee {solve,campaign,reproduce,validate}``.

Exit codes: 0 success, 1 usage or input error, 2 infeasible single solve,
3 solver failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .config import Algorithm, ConfigError, NetworkConfig, Pcm, Scenario, load_config, tomllib, validate_config
from .montecarlo import (
    RunError,
    Sweep,
    run_campaign,
    run_once,
    summarize,
    sweep_from_mapping,
    write_reports,
    write_user_table,
)

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_SOLVER = 0, 1, 2, 3

R_GRID = (1e4, 5e5, 1e6, 1.5e6, 2e6, 2.5e6, 3e6)
KAPPAS = (0.0, 0.5, 2.5)
GLOBAL_JTCN = (Scenario.JTCN, Algorithm.GLOBAL)
GLOBAL_NOMA = (Scenario.NOMA, Algorithm.GLOBAL)
ILO_NOMA = (Scenario.NOMA, Algorithm.ILO)

# Pinned sweeps behind ``reproduce``; ``common`` averages over draws feasible for every scheme.
FIGURES: dict[str, dict] = {
    "fig3a": dict(
        sweep=Sweep(R_GRID, (0.5,), (Pcm.PCM1,), (GLOBAL_JTCN,), tuple(Pcm)),
        common=False,
        users=False,
    ),
    "fig4": dict(
        sweep=Sweep(R_GRID, (0.5,), (Pcm.PCM1, Pcm.PCM2, Pcm.PCMK), (GLOBAL_JTCN,), (Pcm.PCMK,)),
        common=True,
        users=False,
    ),
    "fig5": dict(
        sweep=Sweep(R_GRID, (0.5,), (Pcm.PCMK,), (GLOBAL_JTCN, GLOBAL_NOMA, ILO_NOMA), (Pcm.PCMK,)),
        common=True,
        users=False,
    ),
    "fig6": dict(
        sweep=Sweep((1.5e6,), KAPPAS, (Pcm.PCMK,), (GLOBAL_JTCN, GLOBAL_NOMA), (Pcm.PCMK,)),
        common=True,
        users=False,
    ),
    "fig7": dict(
        sweep=Sweep((1.5e6,), (0.5,), (Pcm.PCMK,), (GLOBAL_JTCN, GLOBAL_NOMA), (Pcm.PCMK,)),
        common=True,
        users=True,
    ),
    "fig8": dict(
        sweep=Sweep(R_GRID, KAPPAS, (Pcm.PCMK,), (GLOBAL_JTCN,), (Pcm.PCMK,)),
        common=False,
        users=True,
    ),
}


class UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML network config (defaults to the built-in two-cell network)")
    common.add_argument("--seed", type=int, help="draw seed (solve) or base seed (campaigns)")
    common.add_argument("-v", "--verbose", action="store_true")

    batch = argparse.ArgumentParser(add_help=False)
    batch.add_argument("--runs", type=int, default=100, help="draws per sweep point (default 100)")
    batch.add_argument("--jobs", type=int, default=1, help="worker processes")
    batch.add_argument("--out", type=Path, default=Path("out"), help="output directory")

    pcm = argparse.ArgumentParser(add_help=False)
    pcm.add_argument("--pcm-opt", choices=[p.value for p in Pcm if p.optimizable])
    pcm.add_argument("--pcm-eval", choices=[p.value for p in Pcm])

    p = argparse.ArgumentParser(prog="noma_ee", description="Energy-efficient power allocation for NOMA and JTCN.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common, pcm], help="solve one channel draw")
    s.add_argument("--scenario", choices=[x.value for x in Scenario])
    s.add_argument("--algorithm", choices=[x.value for x in Algorithm], default="global")
    s.add_argument("--trace", type=Path, help="write the global solver's iteration trace to this CSV")

    c = sub.add_parser("campaign", parents=[common, batch, pcm], help="run a sweep file")
    c.add_argument("sweep", type=Path, help="TOML sweep file with r_min_bps and kappa_w lists")
    c.add_argument("--common", action="store_true", help="average only over draws feasible for every scheme")

    r = sub.add_parser("reproduce", parents=[common, batch], help="regenerate the data behind a figure")
    r.add_argument("figure", choices=sorted(FIGURES))

    sub.add_parser("validate", parents=[common], help="check a config file and print it")
    return p


def _config(args: argparse.Namespace) -> NetworkConfig:
    if args.config is not None:
        if not args.config.is_file():
            raise UsageError(f"config file not found: {args.config}")
        cfg = load_config(args.config)
    else:
        cfg = NetworkConfig()
    changes = {}
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "scenario", None):
        changes["scenario"] = Scenario(args.scenario)
    if getattr(args, "pcm_opt", None):
        changes["pcm_opt"] = Pcm(args.pcm_opt)
    if getattr(args, "pcm_eval", None):
        changes["pcm_eval"] = Pcm(args.pcm_eval)
    return validate_config(cfg.replace(**changes)) if changes else cfg


def _fmt_vec(x: np.ndarray, scale: float = 1.0) -> str:
    return "[" + ", ".join(f"{v / scale:.6g}" for v in x) + "]"


def cmd_solve(args: argparse.Namespace) -> int:
    cfg = _config(args)
    scenario, algorithm = cfg.scenario, Algorithm(args.algorithm)
    if algorithm is Algorithm.ILO and scenario is not Scenario.NOMA:
        raise UsageError("--algorithm ilo requires --scenario noma")
    res = run_once(cfg, cfg.seed, scenario, algorithm)
    if not res.feasible:
        print(f"seed {cfg.seed} {scenario.value}/{algorithm.value}: infeasible (outage)")
        return EXIT_INFEASIBLE
    alloc, out = res.allocation, res.outcome
    print(f"seed {cfg.seed} {scenario.value}/{algorithm.value}  pcm_opt={cfg.pcm_opt.value}  pcm_eval={cfg.pcm_eval.value}")
    for b, members in enumerate(alloc.topology.clusters):
        powers = alloc.ranked()[b]
        users = ", ".join(f"U{u + 1}={p:.6g} W" for u, p in zip(members, powers))
        print(f"  BS{b + 1}: {users}  (total {powers.sum():.6g} W)")
    print(f"  rates [Mbit/s]: {_fmt_vec(res.rates, 1e6)}")
    print(f"  throughput: {res.throughput / 1e6:.6g} Mbit/s")
    print(f"  consumption: {res.breakdown.total:.6g} W")
    print(f"  EE: {res.ee:.6g} bit/J  (optimizer objective {out.lambda_star:.6g} bit/J)")
    iters = f"SCA {out.sca_iterations}, Dinkelbach {out.dinkelbach_iterations}, Newton {out.inner_iterations}"
    if algorithm is Algorithm.ILO:
        iters = f"rounds {out.outer_iterations}, " + iters
    print(f"  iterations: {iters}")
    if args.trace is not None:
        out.write_trace(args.trace)
    return EXIT_OK


def _write_campaign(reports, runs, out: Path, users: bool, common: bool) -> None:
    out.mkdir(parents=True, exist_ok=True)
    write_reports(reports, out / "summary.csv")
    if common:
        pcm_eval = sorted({r.pcm_eval for r in reports}, key=lambda p: list(Pcm).index(p))
        write_reports(summarize(runs, pcm_eval, common=True), out / "summary_common.csv")
    if users:
        write_user_table(runs, out / "users.csv")
    for rep in reports:
        pt = rep.point
        print(
            f"{pt.scenario.value}/{pt.algorithm.value} opt={pt.pcm_opt.value} eval={rep.pcm_eval.value} "
            f"R_min={pt.r_min_bps:g} kappa={pt.kappa_w:g}: outage {rep.outage_ratio:.3f}, "
            f"EE {rep.ee_mean:.4g} +/- {rep.ee_ci:.2g} bit/J, thr {rep.thr_mean / 1e6:.4g} Mbit/s"
        )


def _check_batch(args: argparse.Namespace) -> None:
    if args.runs < 2:
        raise UsageError("--runs must be at least 2")
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")


def cmd_campaign(args: argparse.Namespace) -> int:
    _check_batch(args)
    cfg = _config(args)
    try:
        with open(args.sweep, "rb") as fh:
            sweep = sweep_from_mapping(tomllib.load(fh))
    except FileNotFoundError as exc:
        raise UsageError(f"sweep file not found: {args.sweep}") from exc
    except (tomllib.TOMLDecodeError, ValueError, TypeError) as exc:
        raise UsageError(f"malformed sweep file {args.sweep}: {exc}") from exc
    if args.pcm_eval:
        sweep = Sweep(sweep.r_min_bps, sweep.kappa_w, sweep.pcm_opt, sweep.scenarios, (Pcm(args.pcm_eval),))
    if args.pcm_opt:
        sweep = Sweep(sweep.r_min_bps, sweep.kappa_w, (Pcm(args.pcm_opt),), sweep.scenarios, sweep.pcm_eval)
    reports, runs = run_campaign(cfg, sweep, args.runs, cfg.seed, args.jobs, common=False)
    _write_campaign(reports, runs, args.out, users=True, common=args.common)
    return EXIT_OK


def cmd_reproduce(args: argparse.Namespace) -> int:
    _check_batch(args)
    cfg = _config(args)
    preset = FIGURES[args.figure]
    reports, runs = run_campaign(cfg, preset["sweep"], args.runs, cfg.seed, args.jobs, common=False)
    _write_campaign(reports, runs, args.out, users=preset["users"], common=preset["common"])
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    cfg = _config(args)
    for name, value in vars(cfg).items():
        print(f"{name} = {value}")
    print("config OK")
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "campaign": cmd_campaign, "reproduce": cmd_reproduce, "validate": cmd_validate}


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except RunError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
