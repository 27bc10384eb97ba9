"""Global EE maximization: minimum-power LP, then SCA over Dinkelbach subproblems."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..channel import CnrTable
from ..config import NetworkConfig, Pcm, Scenario, SolverSettings
from ..pcm import affine_coeffs
from ..rates import LinkModel, PowerAllocation, link_model
from .barrier import BarrierError
from .bounds import AffinePower, SurrogateRate, bound_coeffs, link_weights, rate_constraints_q, surrogate_constraints
from .dinkelbach import dinkelbach
from .lp import interior_start, min_power, sinr_targets

log = logging.getLogger(__name__)


class SolverFailure(RuntimeError):
    """An inner solve broke down; carries the iteration it happened in."""


@dataclass
class TraceRow:
    sca_iteration: int
    dinkelbach_iteration: int
    lam: float  # bit/J, surrogate numerator
    f_lambda: float  # bit/s
    ee_true: float  # bit/J at the SCA iterate that this Dinkelbach run produced
    max_residual: float


@dataclass
class SolveOutcome:
    feasible: bool
    allocation: PowerAllocation | None = None
    rates: np.ndarray | None = None
    lambda_star: float = float("nan")  # true-rate EE under the optimizer's PCM, bit/J
    min_power: np.ndarray | None = None
    sca_iterations: int = 0
    dinkelbach_iterations: int = 0
    inner_iterations: int = 0
    ee_trace: list[float] = field(default_factory=list)
    lambda_traces: list[list[float]] = field(default_factory=list)
    trace: list[TraceRow] = field(default_factory=list)
    converged: bool = True
    outer_iterations: int = 0  # ILO rounds; 0 for the global solver

    def write_trace(self, path) -> None:
        import csv

        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["sca_iteration", "dinkelbach_iteration", "lambda", "f_lambda", "ee_true", "max_residual"])
            for r in self.trace:
                w.writerow([r.sca_iteration, r.dinkelbach_iteration, r.lam, r.f_lambda, r.ee_true, r.max_residual])


@dataclass
class _Result:
    p: np.ndarray
    ee: float
    outcome: SolveOutcome


def inner_opts(settings: SolverSettings) -> dict:
    return {"eps": settings.epsilon_inner, "t0": settings.barrier_t0, "mu": settings.barrier_mu}


def true_ee(model: LinkModel, p: np.ndarray, alpha: float, beta: float) -> float:
    return float(np.sum(model.rates(p)) / (alpha * np.sum(p) + beta))


def maximize_ee(
    model: LinkModel,
    gamma: np.ndarray,
    p_max: float,
    alpha: float,
    beta: float,
    settings: SolverSettings,
    p_start: np.ndarray,
) -> _Result:
    """SCA loop from a strictly feasible ``p_start``.

    Each round re-linearizes the rate bounds at the current point and runs
    Dinkelbach on the resulting concave-convex fractional program. The true
    EE never decreases: a round that fails to improve it ends the loop.
    """
    bw = model.bandwidth
    power = AffinePower(alpha, beta)
    p = p_start
    anchor = np.log2(p_start)  # strictly interior for the exact constraints
    opts = inner_opts(settings) | {"anchor": anchor}
    ee = true_ee(model, p, alpha, beta)
    out = SolveOutcome(feasible=True, ee_trace=[ee], converged=False)
    for it in range(1, settings.l_max + 1):
        a, c = bound_coeffs(model.sinr(p))
        weights = link_weights(model, p)
        numerator = SurrogateRate(model, a, c, weights)
        cons = surrogate_constraints(model, gamma, weights, p_max)
        q0 = np.log2(p)
        try:
            res = dinkelbach(
                numerator,
                power,
                cons,
                q0,
                lam0=numerator(q0, False) / power(q0, False),
                eps=settings.epsilon_dinkelbach,
                l_max=settings.l_max,
                inner_opts=opts,
            )
        except BarrierError as exc:
            raise SolverFailure(f"SCA iteration {it}: {exc}") from exc
        out.sca_iterations = it
        out.dinkelbach_iterations += res.iterations
        out.inner_iterations += res.newton_steps
        out.lambda_traces.append([lam * bw for lam in res.lam_trace])
        p_new = np.exp2(res.x)
        ee_new = true_ee(model, p_new, alpha, beta)
        resid = float(np.max(rate_constraints_q(res.x, model, gamma), initial=-np.inf))
        for k, (lam, f_val) in enumerate(zip(res.lam_trace, res.f_trace), start=1):
            out.trace.append(TraceRow(it, k, lam * bw, f_val * bw, ee_new, resid))
        if ee_new < ee:
            out.converged = True
            break
        done = abs(ee_new - ee) <= settings.epsilon_sca * ee_new
        p, ee = p_new, ee_new
        out.ee_trace.append(ee)
        if done:
            out.converged = True
            break
    if not out.converged:
        log.warning("SCA stopped at l_max=%d without converging", settings.l_max)
    return _Result(p=p, ee=ee, outcome=out)


def _gamma(cfg: NetworkConfig, model: LinkModel) -> np.ndarray:
    r_min = np.asarray(cfg.r_min_vector())[model.users]
    return sinr_targets(r_min, model.bandwidth)


def finish(
    model: LinkModel,
    p: np.ndarray,
    alpha: float,
    beta: float,
    out: SolveOutcome,
) -> SolveOutcome:
    out.feasible = True
    out.allocation = PowerAllocation(model.topology, p)
    out.rates = model.rates(p)
    out.lambda_star = true_ee(model, p, alpha, beta)
    return out


def solve_model(model: LinkModel, cfg: NetworkConfig, pcm: Pcm | None = None) -> SolveOutcome:
    """Full global pipeline on a prepared link model."""
    pcm = cfg.pcm_opt if pcm is None else pcm
    alpha, beta = affine_coeffs(pcm, model.topology, cfg)
    gamma = _gamma(cfg, model)
    p_star = min_power(model, gamma, cfg.p_max)
    if p_star is None:
        return SolveOutcome(feasible=False)
    p0 = interior_start(model, gamma, cfg.p_max, p_star)
    if p0 is None:
        # Feasible set without interior: the minimum-power point is the only option.
        out = SolveOutcome(feasible=True, min_power=p_star)
        return finish(model, p_star, alpha, beta, out)
    res = maximize_ee(model, gamma, cfg.p_max, alpha, beta, cfg.solver, p0)
    res.outcome.min_power = p_star
    return finish(model, res.p, alpha, beta, res.outcome)


def solve_global(scenario: Scenario, cnr: CnrTable, cfg: NetworkConfig, pcm: Pcm | None = None) -> SolveOutcome:
    """EE-optimal allocation for the whole network (cell-edge user on BS1 in conventional NOMA)."""
    return solve_model(link_model(cnr, cfg, scenario, edge_bs=0), cfg, pcm)
