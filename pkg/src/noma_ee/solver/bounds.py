"""Concave lower bounds on the rates and convex rate constraints in q = log2(p).

All q-space functions here have the shape
``A q + b + log2(n + V 2^q)`` (or a weighted sum of such rows), whose
gradient is ``A + U`` with ``U = V 2^q / (n + V 2^q)`` and whose Hessian is
``ln 2 (diag(U) - U U^T)`` per row.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rates import LinkModel

LN2 = np.log(2.0)


def bound_coeffs(gamma0: np.ndarray | float) -> tuple[np.ndarray, np.ndarray]:
    """(a, c) with log2(1 + g) >= a log2(g) + c, tight at g = gamma0."""
    g = np.asarray(gamma0, dtype=float)
    if np.any(~(g > 0)):
        raise ValueError("gamma0 must be positive")
    a = g / (1.0 + g)
    c = np.log1p(g) / LN2 - a * np.log2(g)
    return a, c


def comp_split_coeffs(received: np.ndarray) -> np.ndarray:
    """Weights c1_b that make the weighted AM-GM bound on a sum of received powers tight."""
    x = np.asarray(received, dtype=float)
    total = x.sum()
    if not total > 0 or not np.isfinite(total):
        return np.full(x.shape, 1.0 / x.size)
    return x / total


def link_weights(model: LinkModel, p: np.ndarray) -> np.ndarray:
    """Per-link AM-GM weight: 1 for single-link users, c1 split for multi-link users."""
    w = np.ones(model.n_links)
    for row in range(len(model.users)):
        own = model.own_links(row)
        if own.size > 1:
            w[own] = comp_split_coeffs(model.signal[row, own] * p[own])
    return w


def _lse_rows(V: np.ndarray, noise: np.ndarray, q: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    p = np.exp2(q)
    s = noise + V @ p
    U = V * p / s[:, None]
    return np.log2(s), U, p


def _weighted_lse_hessian(U: np.ndarray, w: np.ndarray) -> np.ndarray:
    return LN2 * (np.diag(w @ U) - U.T @ (w[:, None] * U))


def _own_terms(model: LinkModel, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise linear coefficients sum_l w_l q_l and constants sum_l w_l log2(S_l / w_l)."""
    A = np.zeros_like(model.signal)
    const = np.zeros(len(model.users))
    for row in range(len(model.users)):
        own = model.own_links(row)
        w = weights[own]
        A[row, own] = w
        pos = w > 0
        const[row] = np.sum(w[pos] * np.log2(model.signal[row, own][pos] / w[pos]))
    return A, const


@dataclass
class SurrogateRate:
    """Sum of the concave per-user lower bounds, in bit/s/Hz (rates divided by omega B).

    Per user: ``a (sum_l w_l (q_l + log2(S_l / w_l))) + c - a log2(n + W 2^q)``.
    """

    model: LinkModel
    a: np.ndarray
    c: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        A, const = _own_terms(self.model, self.weights)
        self._own = A
        self._lin = self.a @ A
        self._const = float(self.a @ const + self.c.sum())
        self._const_rows = self.a * const + self.c

    def per_user(self, q: np.ndarray) -> np.ndarray:
        log_s, _, _ = _lse_rows(self.model.interference, self.model.noise, q)
        return self.a * (self._own @ q) + self._const_rows - self.a * log_s

    def __call__(self, q: np.ndarray, derivs: bool = True):
        log_s, U, _ = _lse_rows(self.model.interference, self.model.noise, q)
        val = float(self._lin @ q + self._const - self.a @ log_s)
        if not derivs:
            return val
        grad = self._lin - self.a @ U
        hess = -_weighted_lse_hessian(U, self.a)
        return val, grad, hess


@dataclass
class AffinePower:
    """P(2^q) = alpha sum(2^q) + beta, in W."""

    alpha: float
    beta: float

    def __call__(self, q: np.ndarray, derivs: bool = True):
        p = np.exp2(q)
        val = float(self.alpha * p.sum() + self.beta)
        if not derivs:
            return val
        grad = self.alpha * LN2 * p
        return val, grad, np.diag(grad * LN2)


@dataclass
class LseConstraints:
    """Rows ``g_k(q) = A_k q + b_k + log2(n_k + V_k 2^q) <= 0``."""

    A: np.ndarray
    b: np.ndarray
    noise: np.ndarray
    V: np.ndarray

    def __len__(self) -> int:
        return len(self.b)

    def __call__(self, q: np.ndarray, derivs: bool = True):
        log_s, U, _ = _lse_rows(self.V, self.noise, q)
        g = self.A @ q + self.b + log_s
        if not derivs:
            return g
        return g, self.A + U, lambda d: _weighted_lse_hessian(U, d)


def surrogate_constraints(model: LinkModel, gamma: np.ndarray, weights: np.ndarray, p_max: float) -> LseConstraints:
    """Convex inner approximation of the rate constraints plus the per-BS budgets.

    For single-link users this is exact:
    ``-q + log2(W 2^q + n) - log2(S / gamma) <= 0``. For the CoMP user the
    received-power sum is replaced by its weighted AM-GM lower bound, which is
    tight where the weights were computed.
    """
    active = np.flatnonzero(gamma > 0)
    A_own, const = _own_terms(model, weights)
    rate_A = -A_own[active]
    rate_b = np.log2(gamma[active]) - const[active]
    link_bs = model.topology.link_bs
    n_bs = int(link_bs.max()) + 1
    bud_V = np.zeros((n_bs, model.n_links))
    bud_V[link_bs, np.arange(model.n_links)] = 1.0
    return LseConstraints(
        A=np.vstack([rate_A, np.zeros((n_bs, model.n_links))]),
        b=np.concatenate([rate_b, np.full(n_bs, -np.log2(p_max))]),
        noise=np.concatenate([model.noise[active], np.zeros(n_bs)]),
        V=np.vstack([model.interference[active], bud_V]),
    )


def tilde_rates(q: np.ndarray, a: np.ndarray, c: np.ndarray, weights: np.ndarray, model: LinkModel) -> np.ndarray:
    """Per-user surrogate rates in bit/s."""
    return model.bandwidth * SurrogateRate(model, a, c, weights).per_user(q)


def rate_constraints_q(q: np.ndarray, model: LinkModel, gamma: np.ndarray) -> np.ndarray:
    """Exact residuals ``log2(gamma (W 2^q + n)) - log2(S 2^q)``; <= 0 iff R(2^q) >= R_min.

    Users with gamma = 0 have no constraint and get residual -inf.
    """
    p = np.exp2(q)
    out = np.full(len(model.users), -np.inf)
    active = gamma > 0
    out[active] = (
        np.log2(gamma[active])
        + np.log2(model.interference[active] @ p + model.noise[active])
        - np.log2(model.signal[active] @ p)
    )
    return out
