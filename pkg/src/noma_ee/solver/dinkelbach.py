"""Dinkelbach's method for max N(x) / D(x) with N concave and D convex, positive."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .barrier import inner_convex_max


@dataclass
class DinkelbachResult:
    x: np.ndarray
    lam: float
    lam_trace: list[float]
    f_trace: list[float] = field(default_factory=list)
    iterations: int = 0
    newton_steps: int = 0
    converged: bool = False


def _subtractive(numerator: Callable, denominator: Callable, lam: float) -> Callable:
    def objective(x, derivs=True):
        if not derivs:
            return numerator(x, False) - lam * denominator(x, False)
        nv, ng, nh = numerator(x, True)
        dv, dg, dh = denominator(x, True)
        return nv - lam * dv, ng - lam * dg, nh - lam * dh

    return objective


def dinkelbach(
    numerator: Callable,
    denominator: Callable,
    constraints: Callable | None,
    x0: np.ndarray,
    *,
    lam0: float = 0.0,
    eps: float = 1e-6,
    l_max: int = 100,
    inner_opts: dict | None = None,
) -> DinkelbachResult:
    """Iterate ``x_l = argmax N - lam_l D``, ``lam_{l+1} = N(x_l) / D(x_l)``.

    Stops once ``F(lam_l) = N(x_l) - lam_l D(x_l)`` is at most ``eps`` times
    ``lam_{l+1} D(x_l)``, i.e. the ratio improved by a relative ``eps`` or less.
    ``inner_opts`` is forwarded to :func:`inner_convex_max`.
    ``lam`` never decreases: a subproblem answer with ``F < 0`` (possible only
    through inexact inner solves) is discarded and the loop stops.
    """
    x = np.array(x0, dtype=float)
    lam = float(lam0)
    out = DinkelbachResult(x=x, lam=lam, lam_trace=[lam])
    for _ in range(l_max):
        inner = inner_convex_max(_subtractive(numerator, denominator, lam), constraints, x, **(inner_opts or {}))
        out.iterations += 1
        out.newton_steps += inner.newton_steps
        n_val = numerator(inner.x, False)
        d_val = denominator(inner.x, False)
        f_val = n_val - lam * d_val
        out.f_trace.append(f_val)
        if f_val < 0:
            out.converged = True
            break
        x = inner.x
        new_lam = n_val / d_val
        out.lam_trace.append(new_lam)
        done = f_val <= eps * abs(new_lam) * d_val
        lam = max(lam, new_lam)
        if done:
            out.converged = True
            break
    out.x, out.lam = x, lam
    return out
