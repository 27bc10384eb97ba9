import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from noma_ee.channel import realize
from noma_ee.config import NetworkConfig, Scenario
from noma_ee.rates import (
    PowerAllocation,
    build_link_model,
    decoding_count,
    link_model,
    rate_jtcn,
    rate_noma,
    ranked_gains,
    sinr_comp,
    sinr_noma,
    user_rates,
)

from conftest import make_cnr

B = 180e3
seeds = st.integers(min_value=0, max_value=10_000)


def powers(n):
    return st.lists(st.floats(min_value=0.0, max_value=20.0), min_size=n, max_size=n).map(np.array)


def test_sinr_single_user():
    assert sinr_noma(0, 0, [np.array([1.0])], [np.array([[1.0]])], 1.0) == 1.0
    assert sinr_noma(0, 0, [np.array([0.0])], [np.array([[1.0]])], 1.0) == 0.0


def test_sinr_two_users_hand_value():
    # second user hears the first user's power as interference: 3 / (1 * 1 + 1)
    h = [np.array([[5.0], [1.0]])]
    assert sinr_noma(1, 0, [np.array([1.0, 3.0])], h, 1.0) == pytest.approx(1.5)


def test_rate_values():
    table = make_cnr([[1.0]], [-1])
    one = NetworkConfig(n_bs=1, users_per_cluster=1, non_comp_distances=(), omega=1)
    alloc = PowerAllocation(table.topology(Scenario.NOMA), np.array([1.0]))
    assert rate_noma(alloc, table, one)[0] == pytest.approx(180_000.0, rel=1e-12)
    zero = PowerAllocation(alloc.topology, np.array([0.0]))
    assert rate_noma(zero, table, one)[0] == 0.0
    # SINR 1.5 over 100 resource blocks
    assert 100 * B * math.log2(2.5) == pytest.approx(2.3795e7, rel=1e-4)
    table = make_cnr([[150.0]], [-1])
    alloc = PowerAllocation(table.topology(Scenario.NOMA), np.array([1.0]))
    hundred = one.replace(omega=100)
    assert rate_noma(alloc, table, hundred)[0] == pytest.approx(100 * B * math.log2(2.5), rel=1e-12)


def test_rate_checks_scenario():
    table = realize(NetworkConfig(), 1)
    alloc = PowerAllocation(table.topology(Scenario.JTCN), np.ones(6))
    with pytest.raises(ValueError):
        rate_noma(alloc, table, NetworkConfig())
    rate_jtcn(alloc, table, NetworkConfig())


def test_comp_symmetric_hand_value():
    # CoMP user alone in two cells, unit gains and powers, omega = 1: SINR = 2
    table = make_cnr([[1.0, 1.0]], [-1], Scenario.JTCN)
    cfg = NetworkConfig(n_bs=2, users_per_cluster=1, non_comp_distances=(), omega=1)
    alloc = PowerAllocation(table.topology(Scenario.JTCN), np.array([1.0, 1.0]))
    assert rate_jtcn(alloc, table, cfg)[0] == pytest.approx(B * math.log2(3), rel=1e-12)


def test_comp_single_leg_reduces_to_single_bs():
    table = make_cnr([[4.0, 0.5], [0.2, 3.0], [1.0, 2.0]], [0, 1, -1], Scenario.JTCN)
    topo = table.topology(Scenario.JTCN)
    p = [np.array([2.0, 0.7]), np.array([1.5, 0.0])]
    h = ranked_gains(table, topo)
    single = (0.7 * 1.0) / (2.0 * 1.0 + 1.5 * 2.0 + 1.0)
    assert sinr_comp(p, h, 1.0) == pytest.approx(single, rel=1e-12)


@given(seeds, powers(5))
def test_link_model_matches_literal_noma(seed, p):
    cfg = NetworkConfig()
    table = realize(cfg, seed)
    topo = table.topology(Scenario.NOMA, edge_bs=0)
    model = build_link_model(table, topo, cfg.omega, cfg.bandwidth_b)
    alloc = PowerAllocation(topo, p)
    ranked, h = alloc.ranked(), ranked_gains(table, topo)
    sinr = model.sinr(p)
    for b, members in enumerate(topo.clusters):
        for i, u in enumerate(members):
            assert sinr[u] == pytest.approx(sinr_noma(i, b, ranked, h, cfg.omega), rel=1e-12, abs=1e-300)


@given(seeds, powers(6))
def test_link_model_matches_literal_jtcn(seed, p):
    cfg = NetworkConfig()
    table = realize(cfg, seed)
    topo = table.topology(Scenario.JTCN)
    model = build_link_model(table, topo, cfg.omega, cfg.bandwidth_b)
    ranked, h = PowerAllocation(topo, p).ranked(), ranked_gains(table, topo)
    sinr = model.sinr(p)
    assert sinr[table.edge_user] == pytest.approx(sinr_comp(ranked, h, cfg.omega), rel=1e-12, abs=1e-300)
    # non-CoMP users: intra-cluster interference from stronger users only,
    # every link of the other BS (including its CoMP leg) is inter-cell interference
    for b, members in enumerate(topo.clusters):
        for i, u in enumerate(members[:-1]):
            other = sum(ranked[c].sum() * table.cnr[u, c] for c in range(2) if c != b)
            intra = sum(ranked[b][j] for j in range(i)) * table.cnr[u, b]
            expected = ranked[b][i] * table.cnr[u, b] / (other + intra + cfg.omega)
            assert sinr[u] == pytest.approx(expected, rel=1e-12, abs=1e-300)


@given(seeds, powers(5), st.integers(0, 4), st.floats(1.01, 10.0))
def test_rates_monotone(seed, p, link, factor):
    cfg = NetworkConfig()
    model = link_model(realize(cfg, seed), cfg, Scenario.NOMA)
    base = model.rates(p)
    q = p.copy()
    q[link] = q[link] * factor + 1e-3
    raised = model.rates(q)
    owner = model.topology.link_user[link]
    assert raised[owner] >= base[owner]
    others = np.arange(len(base)) != owner
    assert np.all(raised[others] <= base[others] * (1 + 1e-12))


@given(seeds, powers(6))
def test_wider_block_never_lowers_rates(seed, p):
    cfg = NetworkConfig()
    table = realize(cfg, seed)
    r1 = link_model(table, cfg.replace(omega=50), Scenario.JTCN).rates(p)
    r2 = link_model(table, cfg.replace(omega=100), Scenario.JTCN).rates(p)
    assert np.all(r2 >= r1 * (1 - 1e-12))


@given(seeds, powers(5))
def test_jtcn_without_joint_power_equals_noma(seed, p):
    cfg = NetworkConfig()
    table = realize(cfg, seed)
    noma = table.topology(Scenario.NOMA, edge_bs=0)
    assume(noma.clusters[0][-1] == table.edge_user)  # edge user weakest at BS1, as in nearly every draw
    jtcn = table.topology(Scenario.JTCN)
    pj = np.zeros(len(jtcn.links))
    for k, link in enumerate(noma.links):
        pj[jtcn.link_index(*link)] = p[k]
    r_noma = user_rates(PowerAllocation(noma, p), table, cfg)
    r_jtcn = user_rates(PowerAllocation(jtcn, pj), table, cfg)
    assert np.allclose(r_jtcn, r_noma, rtol=1e-12, atol=0)


@given(seeds, powers(5), st.integers(0, 1))
def test_restricted_model_reproduces_global_sinr(seed, p, bs):
    cfg = NetworkConfig()
    model = link_model(realize(cfg, seed), cfg, Scenario.NOMA)
    local = model.restrict(bs, p)
    mine = model.topology.link_bs == bs
    assert np.allclose(local.sinr(p[mine]), model.sinr(p)[local.users], rtol=1e-12)


@pytest.mark.parametrize("i, j, n", [(1, 3, 3), (3, 3, 1), (2, 3, 2), (1, 1, 1)])
def test_decoding_count(i, j, n):
    assert decoding_count(i, j) == n


@pytest.mark.parametrize("i, j", [(0, 3), (4, 3)])
def test_decoding_count_range(i, j):
    with pytest.raises(ValueError):
        decoding_count(i, j)


def test_allocation_views():
    table = realize(NetworkConfig(), 1)
    topo = table.topology(Scenario.JTCN)
    alloc = PowerAllocation(topo, np.arange(6, dtype=float))
    assert np.allclose(alloc.per_bs(), [0 + 1 + 2, 3 + 4 + 5])
    assert alloc.power(table.edge_user, 1) == 5.0
    assert alloc.user_power()[table.edge_user] == 2.0 + 5.0
