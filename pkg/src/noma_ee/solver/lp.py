"""Minimum-power feasibility as a linear program in p.

Each rate requirement SINR_u >= gamma_u is linear in p:
``S_u p - gamma_u (W_u p + n_u) >= 0``. Rows are scaled by ``gamma_u n_u`` so
HiGHS' absolute tolerances act as relative SINR tolerances.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from ..rates import LinkModel

_HIGHS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


class LpError(RuntimeError):
    """The LP solver failed for a reason other than infeasibility."""


def sinr_targets(r_min: np.ndarray, bandwidth: float) -> np.ndarray:
    """gamma_min = 2^(R_min / (omega B)) - 1."""
    return np.expm1(np.asarray(r_min, float) / bandwidth * np.log(2.0))


def _rate_rows(model: LinkModel, gamma: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    active = gamma > 0
    g = gamma[active][:, None]
    rows = model.signal[active] - g * model.interference[active]
    scale = gamma[active] * model.noise[active]
    return rows / scale[:, None], np.ones(int(active.sum()))


def _budget_rows(model: LinkModel, p_max: float) -> tuple[np.ndarray, np.ndarray]:
    topo_bs = model.topology.link_bs
    n_bs = int(topo_bs.max()) + 1
    rows = np.zeros((n_bs, model.n_links))
    rows[topo_bs, np.arange(model.n_links)] = 1.0
    return rows, np.full(n_bs, float(p_max))


def min_power(model: LinkModel, gamma: np.ndarray, p_max: float) -> np.ndarray | None:
    """Least total power meeting every SINR target, or ``None`` when infeasible."""
    rate_a, rate_b = _rate_rows(model, gamma)
    bud_a, bud_b = _budget_rows(model, p_max)
    res = linprog(
        c=np.ones(model.n_links),
        A_ub=np.vstack([-rate_a, bud_a]),
        b_ub=np.concatenate([-rate_b, bud_b]),
        bounds=(0, None),
        method="highs",
        options=_HIGHS,
    )
    if res.status == 2:
        return None
    if res.status != 0:
        raise LpError(f"minimum-power LP failed: {res.message}")
    return np.maximum(res.x, 0.0)


def rate_slack(model: LinkModel, gamma: np.ndarray, p: np.ndarray) -> np.ndarray:
    """S p - gamma (W p + n) per user; >= 0 means the requirement is met."""
    return model.signal @ p - gamma * (model.interference @ p + model.noise)


def is_strictly_feasible(model: LinkModel, gamma: np.ndarray, p_max: float, p: np.ndarray) -> bool:
    if np.any(p <= 0):
        return False
    active = gamma > 0
    if np.any(rate_slack(model, gamma, p)[active] <= 0):
        return False
    per_bs = np.bincount(model.topology.link_bs, weights=p)
    return bool(np.all(per_bs < p_max))


def interior_start(model: LinkModel, gamma: np.ndarray, p_max: float, p_star: np.ndarray) -> np.ndarray | None:
    """A strictly feasible point close to the minimum-power solution.

    First scale ``p_star`` up by at most 5% (scaling all powers raises every
    SINR); if the budget leaves no room, mix in a phase-I point that maximizes
    the smallest relative margin. Returns ``None`` if the feasible set has an
    empty interior.
    """
    floor = 1e-9 * p_max
    p = np.maximum(p_star, floor)
    per_bs = np.bincount(model.topology.link_bs, weights=p)
    mu = min(1.05, (1.0 - 1e-6) * p_max / per_bs.max())
    if mu > 1.0:
        cand = mu * p
        if is_strictly_feasible(model, gamma, p_max, cand):
            return cand
    p_phase1 = _phase_one(model, gamma, p_max)
    if p_phase1 is None:
        return None
    cand = 0.9 * p_star + 0.1 * p_phase1
    return cand if is_strictly_feasible(model, gamma, p_max, cand) else None


def _phase_one(model: LinkModel, gamma: np.ndarray, p_max: float) -> np.ndarray | None:
    """max s  s.t.  scaled rate rows >= 1 + s,  sum_b p <= p_max (1 - s),  p >= s p_max 1e-3."""
    n = model.n_links
    rate_a, rate_b = _rate_rows(model, gamma)
    bud_a, bud_b = _budget_rows(model, p_max)
    a_ub = np.vstack(
        [
            np.hstack([-rate_a, np.ones((len(rate_b), 1))]),
            np.hstack([bud_a, bud_b[:, None]]),
            np.hstack([-np.eye(n), np.full((n, 1), 1e-3 * p_max)]),
        ]
    )
    b_ub = np.concatenate([-rate_b, bud_b, np.zeros(n)])
    c = np.zeros(n + 1)
    c[-1] = -1.0
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=[(0, None)] * n + [(None, 1.0)], method="highs", options=_HIGHS)
    if res.status != 0 or res.x[-1] <= 1e-9:
        return None
    return res.x[:n]
