import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from noma_ee.solver.barrier import BarrierError, inner_convex_max, pull_inward


def quad(center):
    c = np.asarray(center, dtype=float)

    def f(x, derivs=True):
        v = -0.5 * np.sum((x - c) ** 2)
        if not derivs:
            return v
        return v, -(x - c), -np.eye(len(x))

    return f


def box(lo, hi):
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    n = len(lo)

    def g(x, derivs=True):
        v = np.concatenate([lo - x, x - hi])
        if not derivs:
            return v
        J = np.vstack([-np.eye(n), np.eye(n)])
        return v, J, lambda d: np.zeros((n, n))

    return g


def test_unconstrained_quadratic():
    res = inner_convex_max(quad([3.0]), None, np.array([0.0]))
    assert res.x == pytest.approx([3.0], abs=1e-9)


@given(st.floats(-5, 5), st.floats(0.1, 3))
def test_one_dim_box(center, width):
    f = quad([center])
    res = inner_convex_max(f, box([-width], [width]), np.array([0.0]))
    best = np.array([np.clip(center, -width, width)])
    # The guarantee is on the objective; with a zero multiplier x itself converges only like t^-1/2.
    assert f(res.x, False) >= f(best, False) - 2 * res.gap - 1e-12
    assert abs(res.x[0]) < width


def budget_problem():
    """max sum log(1 + w_i x_i) - 0.3 sum x_i  s.t.  x >= 0, x1 + x2 <= 2."""
    w = np.array([1.0, 3.0])

    def f(x, derivs=True):
        v = np.sum(np.log1p(w * x)) - 0.3 * np.sum(x)
        if not derivs:
            return v
        return v, w / (1 + w * x) - 0.3, np.diag(-(w**2) / (1 + w * x) ** 2)

    def g(x, derivs=True):
        v = np.array([-x[0], -x[1], x[0] + x[1] - 2.0])
        if not derivs:
            return v
        J = np.array([[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0]])
        return v, J, lambda d: np.zeros((2, 2))

    return f, g


def test_budget_boundary_against_grid():
    f, g = budget_problem()
    res = inner_convex_max(f, g, np.array([0.1, 0.1]))
    xs = np.linspace(0, 2, 2001)
    X, Y = np.meshgrid(xs, xs)
    ok = X + Y <= 2.0
    F = np.log1p(X) + np.log1p(3 * Y) - 0.3 * (X + Y)
    best = F[ok].max()
    assert f(res.x, False) >= best - 1e-3 * abs(best)
    assert np.all(g(res.x, False) <= 0)
    assert res.x.sum() == pytest.approx(2.0, abs=1e-6)  # budget is active
    assert res.gap <= 1e-9


def test_rejects_infeasible_start():
    f, g = budget_problem()
    with pytest.raises(BarrierError):
        inner_convex_max(f, g, np.array([1.5, 1.5]))
    with pytest.raises(BarrierError):
        inner_convex_max(f, g, np.array([0.0, 1.0]))  # on the boundary


def test_never_worse_than_start():
    f, g = budget_problem()
    rng = np.random.default_rng(0)
    for _ in range(50):
        x0 = rng.uniform(0.01, 0.99, 2)
        res = inner_convex_max(f, g, x0)
        assert f(res.x, False) >= f(x0, False)


def test_pull_inward_reaches_margin():
    g = box([0.0, 0.0], [1.0, 1.0])
    x = np.array([1e-12, 0.5])
    y = pull_inward(g, x, np.array([0.5, 0.5]), 1e-3)
    assert np.min(-g(y, False)) >= 1e-3 - 1e-12
    assert np.linalg.norm(y - x) < 2e-3
    far = np.array([0.3, 0.4])
    assert pull_inward(g, far, np.array([0.5, 0.5]), 1e-3) is far


def test_anchor_start_matches_cold_start():
    f, g = budget_problem()
    cold = inner_convex_max(f, g, np.array([0.5, 0.5]))
    warm = inner_convex_max(f, g, np.array([1e-13, 1.0]), anchor=np.array([0.5, 0.5]))
    assert f(warm.x, False) == pytest.approx(f(cold.x, False), rel=1e-8)
