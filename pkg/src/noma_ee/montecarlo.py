"""Seeded Monte Carlo campaigns: per-draw solves, metrics and confidence intervals.

Every scheme sees the same channel draw for a given seed (common random
numbers), so per-draw comparisons between schemes are exact.
"""

from __future__ import annotations

import csv
import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .channel import CnrTable, realize
from .config import Algorithm, NetworkConfig, Pcm, Scenario, validate_config
from .pcm import PowerBreakdown, consumption, receiver_side_power
from .rates import PowerAllocation
from .solver import SolveOutcome, solve_global, solve_ilo

log = logging.getLogger(__name__)

Z95 = 1.96

REPORT_COLUMNS = (
    "scenario",
    "algorithm",
    "pcm_opt",
    "pcm_eval",
    "r_min_bps",
    "kappa_w",
    "n_runs",
    "outage_ratio",
    "ee_mean",
    "ee_ci",
    "thr_mean",
    "thr_ci",
    "alloc_power_mean_w",
)


class RunError(RuntimeError):
    def __init__(self, seed: int, message: str):
        super().__init__(f"seed {seed}: {message}")
        self.seed = seed


@dataclass
class RunResult:
    seed: int
    scenario: Scenario
    algorithm: Algorithm
    feasible: bool
    allocation: PowerAllocation | None = None
    rates: np.ndarray | None = None
    ee: float = float("nan")  # bit/J under cfg.pcm_eval
    ee_by_pcm: dict[Pcm, float] = field(default_factory=dict)
    throughput: float = float("nan")  # bit/s
    breakdown: PowerBreakdown | None = None
    user_ee: np.ndarray | None = None  # bit/J, receiver-side consumption per user
    outcome: SolveOutcome | None = None

    @property
    def transmit_power(self) -> float:
        return float(np.sum(self.allocation.powers)) if self.feasible else float("nan")


def evaluate(outcome: SolveOutcome, cfg: NetworkConfig, seed: int, scenario: Scenario, algorithm: Algorithm) -> RunResult:
    """Metrics of a solved draw; EE always uses ``cfg.pcm_eval`` whatever PCM was optimized."""
    if not outcome.feasible:
        return RunResult(seed, scenario, algorithm, feasible=False, outcome=outcome)
    alloc, rates = outcome.allocation, outcome.rates
    thr = float(np.sum(rates))
    ee_by_pcm = {pcm: thr / consumption(pcm, alloc, cfg, rates).total for pcm in Pcm}
    breakdown = consumption(cfg.pcm_eval, alloc, cfg, rates)
    return RunResult(
        seed=seed,
        scenario=scenario,
        algorithm=algorithm,
        feasible=True,
        allocation=alloc,
        rates=rates,
        ee=thr / breakdown.total,
        ee_by_pcm=ee_by_pcm,
        throughput=thr,
        breakdown=breakdown,
        user_ee=rates / receiver_side_power(alloc, cfg),
        outcome=outcome,
    )


def solve(cnr: CnrTable, cfg: NetworkConfig, scenario: Scenario, algorithm: Algorithm) -> SolveOutcome:
    if algorithm is Algorithm.ILO:
        if scenario is not Scenario.NOMA:
            raise ValueError("ILO is defined for conventional NOMA only")
        return solve_ilo(cnr, cfg)
    return solve_global(scenario, cnr, cfg)


def run_once(cfg: NetworkConfig, seed: int, scenario: Scenario, algorithm: Algorithm = Algorithm.GLOBAL) -> RunResult:
    """Draw the channel for ``seed``, solve, and evaluate."""
    cnr = realize(cfg, seed)
    try:
        outcome = solve(cnr, cfg, scenario, algorithm)
    except (RuntimeError, ValueError, np.linalg.LinAlgError) as exc:
        raise RunError(seed, f"{type(exc).__name__}: {exc}") from exc
    return evaluate(outcome, cfg, seed, scenario, algorithm)


# --- sweeps -------------------------------------------------------------------


@dataclass(frozen=True)
class SweepPoint:
    r_min_bps: float
    kappa_w: float
    pcm_opt: Pcm
    scenario: Scenario
    algorithm: Algorithm

    def config(self, base: NetworkConfig) -> NetworkConfig:
        return base.replace(r_min=self.r_min_bps, kappa=self.kappa_w, pcm_opt=self.pcm_opt, scenario=self.scenario)

    @property
    def draw_group(self) -> tuple:
        """Points sharing a group are compared on common feasible draws."""
        return (self.r_min_bps, self.kappa_w, self.pcm_opt)


@dataclass(frozen=True)
class Sweep:
    r_min_bps: tuple[float, ...]
    kappa_w: tuple[float, ...]
    pcm_opt: tuple[Pcm, ...] = (Pcm.PCMK,)
    scenarios: tuple[tuple[Scenario, Algorithm], ...] = ((Scenario.JTCN, Algorithm.GLOBAL),)
    pcm_eval: tuple[Pcm, ...] = (Pcm.PCMK,)

    def points(self) -> list[SweepPoint]:
        return [
            SweepPoint(float(r), float(k), pcm, sc, alg)
            for r, k, pcm, (sc, alg) in itertools.product(self.r_min_bps, self.kappa_w, self.pcm_opt, self.scenarios)
        ]


def sweep_from_mapping(data: dict) -> Sweep:
    """Build a sweep from parsed TOML: ``r_min_bps`` and ``kappa_w`` lists are required."""
    for key in ("r_min_bps", "kappa_w"):
        if key not in data:
            raise ValueError(f"sweep file is missing '{key}'")
        if not isinstance(data[key], list) or not data[key]:
            raise ValueError(f"sweep '{key}' must be a non-empty list")
    scenarios = []
    for name in data.get("schemes", ["jtcn"]):
        if name == "ilo":
            scenarios.append((Scenario.NOMA, Algorithm.ILO))
        else:
            scenarios.append((Scenario(name), Algorithm.GLOBAL))
    return Sweep(
        r_min_bps=tuple(float(v) for v in data["r_min_bps"]),
        kappa_w=tuple(float(v) for v in data["kappa_w"]),
        pcm_opt=tuple(Pcm(v) for v in data.get("pcm_opt", ["pcmk"])),
        scenarios=tuple(scenarios),
        pcm_eval=tuple(Pcm(v) for v in data.get("pcm_eval", ["pcmk"])),
    )


def seeds(base_seed: int, n_runs: int) -> list[int]:
    return list(range(base_seed + 1, base_seed + n_runs + 1))


def _task(args: tuple[NetworkConfig, int, Scenario, Algorithm]) -> RunResult:
    return run_once(*args)


def collect_runs(
    base: NetworkConfig,
    points: Sequence[SweepPoint],
    n_runs: int,
    base_seed: int | None = None,
    jobs: int = 1,
) -> dict[SweepPoint, list[RunResult]]:
    """Solve every (point, seed) pair; results per point are ordered by seed."""
    base_seed = base.seed if base_seed is None else base_seed
    tasks = []
    for pt in points:
        cfg = validate_config(pt.config(base))
        tasks.extend((cfg, s, pt.scenario, pt.algorithm) for s in seeds(base_seed, n_runs))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        results = [_task(t) for t in tasks]
    out: dict[SweepPoint, list[RunResult]] = {}
    for k, pt in enumerate(points):
        out[pt] = sorted(results[k * n_runs : (k + 1) * n_runs], key=lambda r: r.seed)
    return out


# --- statistics ----------------------------------------------------------------


def confidence_interval(samples: Iterable[float], z: float = Z95) -> tuple[float, float]:
    """Mean and normal-approximation half width ``z * s / sqrt(n)``."""
    x = np.asarray(list(samples), dtype=float)
    if x.size < 2:
        raise ValueError(f"need at least 2 samples for a confidence interval, got {x.size}")
    return float(x.mean()), float(z * x.std(ddof=1) / math.sqrt(x.size))


def _mean_ci(x: list[float]) -> tuple[float, float]:
    if len(x) >= 2:
        return confidence_interval(x)
    return (float(x[0]) if x else float("nan")), float("nan")


@dataclass(frozen=True)
class McReport:
    point: SweepPoint
    pcm_eval: Pcm
    n_runs: int
    n_feasible: int
    n_averaged: int
    outage_ratio: float
    ee_mean: float
    ee_ci: float
    thr_mean: float
    thr_ci: float
    alloc_power_mean_w: float
    common_draws: bool  # averages restricted to draws feasible for every scheme in the group

    def row(self) -> dict[str, object]:
        p = self.point
        return {
            "scenario": p.scenario.value,
            "algorithm": p.algorithm.value,
            "pcm_opt": p.pcm_opt.value,
            "pcm_eval": self.pcm_eval.value,
            "r_min_bps": p.r_min_bps,
            "kappa_w": p.kappa_w,
            "n_runs": self.n_runs,
            "outage_ratio": self.outage_ratio,
            "ee_mean": self.ee_mean,
            "ee_ci": self.ee_ci,
            "thr_mean": self.thr_mean,
            "thr_ci": self.thr_ci,
            "alloc_power_mean_w": self.alloc_power_mean_w,
        }


def common_feasible_seeds(runs: dict[SweepPoint, list[RunResult]]) -> dict[tuple, set[int]]:
    """Per draw group, the seeds feasible for every scheme in it."""
    groups: dict[tuple, set[int]] = {}
    for pt, rs in runs.items():
        ok = {r.seed for r in rs if r.feasible}
        key = pt.draw_group
        groups[key] = ok if key not in groups else groups[key] & ok
    return groups


def summarize(
    runs: dict[SweepPoint, list[RunResult]],
    pcm_eval: Sequence[Pcm] = (Pcm.PCMK,),
    common: bool = False,
) -> list[McReport]:
    """One report per (point, evaluation PCM). Outage always counts every run."""
    keep = common_feasible_seeds(runs) if common else None
    reports = []
    for pt, rs in runs.items():
        feasible = [r for r in rs if r.feasible]
        used = [r for r in feasible if keep is None or r.seed in keep[pt.draw_group]]
        thr_mean, thr_ci = _mean_ci([r.throughput for r in used])
        power = [r.transmit_power for r in used]
        for pcm in pcm_eval:
            ee_mean, ee_ci = _mean_ci([r.ee_by_pcm[pcm] for r in used])
            reports.append(
                McReport(
                    point=pt,
                    pcm_eval=pcm,
                    n_runs=len(rs),
                    n_feasible=len(feasible),
                    n_averaged=len(used),
                    outage_ratio=1.0 - len(feasible) / len(rs),
                    ee_mean=ee_mean,
                    ee_ci=ee_ci,
                    thr_mean=thr_mean,
                    thr_ci=thr_ci,
                    alloc_power_mean_w=float(np.mean(power)) if power else float("nan"),
                    common_draws=common,
                )
            )
    return reports


def run_campaign(
    base: NetworkConfig,
    sweep: Sweep,
    n_runs: int,
    base_seed: int | None = None,
    jobs: int = 1,
    common: bool = False,
) -> tuple[list[McReport], dict[SweepPoint, list[RunResult]]]:
    if n_runs < 2:
        raise ValueError("n_runs must be at least 2")
    runs = collect_runs(base, sweep.points(), n_runs, base_seed, jobs)
    return summarize(runs, sweep.pcm_eval, common), runs


# --- output --------------------------------------------------------------------


def _fmt(v: object) -> object:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else v


def write_reports(reports: Sequence[McReport], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(REPORT_COLUMNS)
        for rep in reports:
            row = rep.row()
            w.writerow([_fmt(row[c]) for c in REPORT_COLUMNS])


USER_COLUMNS = (
    "scenario",
    "algorithm",
    "pcm_opt",
    "r_min_bps",
    "kappa_w",
    "seed",
    "user",
    "role",
    "serving_bs",
    "power_w",
    "rate_bps",
    "user_ee_bit_per_j",
)


def user_role(alloc: PowerAllocation, user: int) -> str:
    topo = alloc.topology
    if user == topo.edge_user:
        return "edge"
    return "head" if user in topo.heads() else "middle"


def write_user_table(runs: dict[SweepPoint, list[RunResult]], path: str | Path) -> None:
    """One row per (point, feasible draw, user) for per-user rate and EE plots."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(USER_COLUMNS)
        for pt, rs in runs.items():
            for r in rs:
                if not r.feasible:
                    continue
                alloc = r.allocation
                power = alloc.user_power()
                for u in range(alloc.topology.n_users):
                    serving = "+".join(str(b + 1) for b in alloc.topology.serving(u))
                    w.writerow(
                        [
                            pt.scenario.value,
                            pt.algorithm.value,
                            pt.pcm_opt.value,
                            _fmt(pt.r_min_bps),
                            _fmt(pt.kappa_w),
                            r.seed,
                            u + 1,
                            user_role(alloc, u),
                            serving,
                            _fmt(power[u]),
                            _fmt(r.rates[u]),
                            _fmt(r.user_ee[u]),
                        ]
                    )
