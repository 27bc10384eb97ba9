"""Log-barrier interior-point method for small dense smooth convex programs.

maximize f(x) subject to g_k(x) <= 0, with f concave and g_k convex.

``objective(x, derivs)`` returns ``f`` or ``(f, grad, hess)``;
``constraints(x, derivs)`` returns ``g`` or ``(g, jac, hess_sum)`` where
``hess_sum(d)`` gives ``sum_k d_k hess g_k``. Problems here have at most a
handful of variables, so every Newton system is solved densely.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


class BarrierError(RuntimeError):
    pass


@dataclass
class InnerResult:
    x: np.ndarray
    newton_steps: int
    gap: float  # m / t at exit, a bound on the suboptimality


def _newton_direction(H: np.ndarray, grad: np.ndarray) -> np.ndarray:
    try:
        step = np.linalg.solve(H, -grad)
        if np.all(np.isfinite(step)):
            return step
    except np.linalg.LinAlgError:
        pass
    reg = 1e-12 * max(1.0, np.abs(np.diag(H)).max())
    return np.linalg.lstsq(H + reg * np.eye(len(grad)), -grad, rcond=None)[0]


def _warm_t(objective, constraints, x, t0: float, m: int, eps: float) -> float:
    """Pick the barrier weight that best centres ``x``: argmin_t |t grad f - grad barrier|.

    For a cold start this returns ``t0``; for a start taken from a nearby
    solve it skips the stages whose central points lie far from ``x``.
    """
    _, fg, _ = objective(x, True)
    g, G, _ = constraints(x, True)
    bg = G.T @ (-1.0 / g)
    denom = fg @ fg
    if denom <= 0:
        return t0
    return float(np.clip((fg @ bg) / denom, t0, m / eps))


def pull_inward(constraints: Callable, x: np.ndarray, anchor: np.ndarray, margin: float) -> np.ndarray:
    """Move ``x`` toward a strictly feasible ``anchor`` until every slack is at least ``margin``.

    Slacks are concave along the segment, so the smallest one is too and a
    bisection on the mixing weight finds the shortest adequate move.
    """
    def worst(theta: float) -> float:
        return float(np.min(-np.asarray(constraints(x + theta * (anchor - x), False))))

    if worst(0.0) >= margin:
        return x
    target = min(margin, 0.5 * worst(1.0))
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if worst(mid) >= target:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-12:
            break
    return x + hi * (anchor - x)


def inner_convex_max(
    objective: Callable,
    constraints: Callable | None,
    x0: np.ndarray,
    *,
    eps: float = 1e-9,
    t0: float = 1.0,
    mu: float = 10.0,
    newton_tol: float = 1e-10,
    max_newton: int = 200,
    anchor: np.ndarray | None = None,
    margin: float = 1e-4,
) -> InnerResult:
    """Maximize ``objective`` over ``constraints <= 0`` from a strictly feasible ``x0``.

    Starts whose smallest slack is below ``margin`` are first moved toward
    ``anchor`` (when given and strictly feasible): Newton systems at points
    within rounding distance of the boundary are numerically singular.
    """
    x = np.array(x0, dtype=float)
    m = 0
    if constraints is not None:
        g0 = np.asarray(constraints(x, False))
        m = g0.size
        if m and not np.all(g0 < 0):
            raise BarrierError("start point is not strictly feasible; move x0 inward")
        if m and anchor is not None and np.all(np.asarray(constraints(anchor, False)) < 0):
            x = pull_inward(constraints, x, np.asarray(anchor, dtype=float), margin)

    def phi(y: np.ndarray, t: float) -> float:
        # Trial points of a long step may overflow; they are simply rejected.
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            val = -t * objective(y, False)
            if m:
                g = np.asarray(constraints(y, False))
                if not np.all(g < 0):
                    return np.inf
                val -= np.sum(np.log(-g))
        return val if np.isfinite(val) else np.inf

    steps = 0
    t = _warm_t(objective, constraints, x, t0, m, eps) if m else 1.0
    floor = False  # set once slacks are too small to resolve in double precision
    while True:
        for _ in range(max_newton):
            f, fg, fH = objective(x, True)
            grad = -t * fg
            H = -t * fH
            if m:
                g, G, hess_sum = constraints(x, True)
                d = -1.0 / g
                grad = grad + G.T @ d
                H = H + hess_sum(d) + (G.T * d**2) @ G
            step = _newton_direction(H, grad)
            decrement = -grad @ step
            phi0 = phi(x, t)
            # Centred, either to tolerance or to what rounding in phi allows.
            if decrement / 2.0 <= max(newton_tol, 1e-13 * abs(phi0)):
                break
            # Damped step far from the centre: a full step from a badly centred
            # point can land at rounding distance from the boundary, after which
            # Newton only creeps along it.
            lam_n = np.sqrt(max(decrement, 0.0))
            s = 1.0 if lam_n <= 1.0 else 1.0 / (1.0 + lam_n)
            while s > 1e-14:
                cand = x + s * step
                phi1 = phi(cand, t)
                if phi1 <= phi0 - 0.25 * s * decrement:
                    break
                s *= 0.5
            else:
                floor = True
                break
            x = cand
            steps += 1
            # A backtracked step that barely moves phi means the slacks have hit
            # rounding level; further stages would only creep.
            if s < 1.0 and phi0 - phi1 <= 1e-12 * max(1.0, abs(phi0)):
                floor = True
                break
        if m == 0 or m / t <= eps or floor:
            break
        t *= mu
    if objective(x, False) < objective(np.asarray(x0, dtype=float), False):
        x = np.array(x0, dtype=float)  # x0 was already optimal to within the gap
    return InnerResult(x=x, newton_steps=steps, gap=m / t if m else 0.0)
