"""Iterative local optimization: each BS maximizes its own EE in turn.

A BS sees the other BSs' current powers only as inter-cell interference
folded into its noise term. Rounds repeat until the network EE settles and
every user meets its rate requirement under the joint allocation.
"""

from __future__ import annotations

import logging

import numpy as np

from ..channel import CnrTable
from ..config import NetworkConfig, Pcm, Scenario
from ..pcm import affine_coeffs
from ..rates import LinkModel, link_model
from .lp import interior_start, min_power
from .sca import SolveOutcome, _gamma, finish, maximize_ee, true_ee

log = logging.getLogger(__name__)


def _local_step(local: LinkModel, cfg: NetworkConfig, pcm: Pcm) -> tuple[np.ndarray | None, SolveOutcome | None]:
    """Local min-power LP, then local SCA. ``(None, None)`` when the BS cannot serve its users."""
    gamma = _gamma(cfg, local)
    p_star = min_power(local, gamma, cfg.p_max)
    if p_star is None:
        return None, None
    p0 = interior_start(local, gamma, cfg.p_max, p_star)
    if p0 is None:
        return p_star, None
    alpha, beta = affine_coeffs(pcm, local.topology, cfg)
    res = maximize_ee(local, gamma, cfg.p_max, alpha, beta, cfg.solver, p0)
    return res.p, res.outcome


def meets_targets(model: LinkModel, cfg: NetworkConfig, p: np.ndarray, rel_tol: float = 1e-6) -> bool:
    r_min = np.asarray(cfg.r_min_vector())[model.users]
    return bool(np.all(model.rates(p) >= r_min * (1.0 - rel_tol)))


def solve_ilo(cnr: CnrTable, cfg: NetworkConfig, pcm: Pcm | None = None) -> SolveOutcome:
    """Round-robin local EE maximization for conventional NOMA.

    The cell-edge user joins the BS with its best CNR, fixed for the whole
    draw. ``outer_iterations`` counts the rounds that were needed to reach
    the final allocation; the extra round that only confirms nothing moves
    is not counted, so a network without inter-cell coupling reports 1.
    """
    pcm = cfg.pcm_opt if pcm is None else pcm
    edge_bs = cnr.best_bs(cnr.edge_user)
    model = link_model(cnr, cfg, Scenario.NOMA, edge_bs=edge_bs)
    alpha, beta = affine_coeffs(pcm, model.topology, cfg)
    link_bs = model.topology.link_bs
    p = np.zeros(model.n_links)
    out = SolveOutcome(feasible=True, converged=False)
    ee = float("nan")
    eps = cfg.solver.epsilon_sca
    for rnd in range(1, cfg.solver.l_max + 1):
        for b in range(model.topology.n_bs):
            p_local, local_out = _local_step(model.restrict(b, p), cfg, pcm)
            if p_local is None:
                log.info("ILO round %d: BS %d cannot meet its users' targets", rnd, b + 1)
                return SolveOutcome(feasible=False, outer_iterations=max(rnd - 1, 1))
            p = p.copy()
            p[link_bs == b] = p_local
            if local_out is not None:
                out.sca_iterations += local_out.sca_iterations
                out.dinkelbach_iterations += local_out.dinkelbach_iterations
                out.inner_iterations += local_out.inner_iterations
        out.outer_iterations = max(rnd - 1, 1)
        ee_new = true_ee(model, p, alpha, beta)
        out.ee_trace.append(ee_new)
        settled = np.isfinite(ee) and abs(ee_new - ee) <= eps * ee_new
        ee = ee_new
        if settled and meets_targets(model, cfg, p):
            out.converged = True
            break
    if not out.converged:
        if not meets_targets(model, cfg, p):
            log.info("ILO ended after %d rounds with unmet rate targets", out.outer_iterations)
            return SolveOutcome(feasible=False, outer_iterations=out.outer_iterations)
        log.warning("ILO stopped at l_max=%d without converging", cfg.solver.l_max)
    out.min_power = None
    return finish(model, p, alpha, beta, out)
