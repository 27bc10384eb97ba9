import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from noma_ee import montecarlo as mc
from noma_ee.channel import realize
from noma_ee.config import Algorithm, NetworkConfig, Pcm, Scenario
from noma_ee.rates import ranked_gains, sinr_comp, sinr_noma

CFG = NetworkConfig()


def test_ci_examples():
    assert mc.confidence_interval([0.0, 2.0]) == pytest.approx((1.0, 1.96))
    assert mc.confidence_interval([3.0] * 10) == (3.0, 0.0)
    with pytest.raises(ValueError):
        mc.confidence_interval([1.0])


@given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=200))
def test_ci_matches_hand_formula(xs):
    n = len(xs)
    mean = sum(xs) / n
    sd = math.sqrt(sum((x - mean) ** 2 for x in xs) / (n - 1))
    m, hw = mc.confidence_interval(xs)
    assert m == pytest.approx(mean, rel=1e-9, abs=1e-6)
    assert hw == pytest.approx(1.96 * sd / math.sqrt(n), rel=1e-7, abs=1e-6)


def literal_rates(res, cnr):
    alloc = res.allocation
    topo = alloc.topology
    p = alloc.ranked()
    h = ranked_gains(cnr, topo)
    out = np.zeros(topo.n_users)
    for b, members in enumerate(topo.clusters):
        for i, u in enumerate(members):
            if u == topo.edge_user and topo.scenario is Scenario.JTCN:
                s = sinr_comp(p, h, CFG.omega)
            else:
                s = sinr_noma(i, b, p, h, CFG.omega)
            out[u] = CFG.omega * CFG.bandwidth_b * math.log2(1 + s)
    return out


def literal_pcmk(res, cfg):
    total = 0.0
    for b, members in enumerate(res.allocation.topology.clusters):
        J = len(members)
        total += cfg.p_fix + sum((1 + cfg.rho) * x for x in res.allocation.ranked()[b])
        total += sum((J - i + 1) * cfg.kappa for i in range(1, J + 1))
    return total


@pytest.mark.parametrize("scenario", list(Scenario))
def test_ee_hand_recomputation(scenario):
    res = mc.run_once(CFG, 1, scenario)
    cnr = realize(CFG, 1)
    rates = literal_rates(res, cnr)
    assert res.rates == pytest.approx(rates, rel=1e-9)
    assert res.ee == pytest.approx(rates.sum() / literal_pcmk(res, CFG), rel=1e-9)
    assert res.ee == res.throughput / res.breakdown.total
    assert res.ee_by_pcm[Pcm.PCM1] == pytest.approx(rates.sum() / res.allocation.powers.sum(), rel=1e-9)


def test_infeasible_run():
    res = mc.run_once(CFG, 2, Scenario.NOMA)
    assert not res.feasible
    assert math.isnan(res.ee) and math.isnan(res.throughput) and res.rates is None


def test_common_random_numbers(monkeypatch):
    seen = []
    real = mc.solve

    def spy(cnr, cfg, scenario, algorithm):
        seen.append(cnr)
        return real(cnr, cfg, scenario, algorithm)

    monkeypatch.setattr(mc, "solve", spy)
    for scenario, algorithm in [(Scenario.JTCN, Algorithm.GLOBAL), (Scenario.NOMA, Algorithm.GLOBAL), (Scenario.NOMA, Algorithm.ILO)]:
        mc.run_once(CFG, 4, scenario, algorithm)
    assert all(np.array_equal(seen[0].cnr, c.cnr) for c in seen[1:])


def test_ee_independent_of_pcm_opt():
    res = mc.run_once(CFG, 3, Scenario.JTCN)
    other = CFG.replace(pcm_opt=Pcm.PCM1)
    again = mc.evaluate(res.outcome, other, 3, Scenario.JTCN, Algorithm.GLOBAL)
    assert again.ee == res.ee and again.ee_by_pcm == res.ee_by_pcm


def test_run_error_carries_seed(monkeypatch):
    def boom(*args):
        raise RuntimeError("inner solve diverged")

    monkeypatch.setattr(mc, "solve", boom)
    with pytest.raises(mc.RunError) as exc:
        mc.run_once(CFG, 9, Scenario.NOMA)
    assert exc.value.seed == 9 and "seed 9" in str(exc.value)


def test_ilo_requires_noma():
    with pytest.raises(mc.RunError):
        mc.run_once(CFG, 1, Scenario.JTCN, Algorithm.ILO)


SMALL = mc.Sweep((1e4, 1.5e6), (0.5,), (Pcm.PCMK,), ((Scenario.JTCN, Algorithm.GLOBAL), (Scenario.NOMA, Algorithm.GLOBAL)))


@pytest.fixture(scope="module")
def small_campaign():
    return mc.run_campaign(CFG, SMALL, 4, base_seed=0)


def test_campaign_report(small_campaign):
    reports, runs = small_campaign
    assert len(reports) == 4
    for rep in reports:
        assert rep.outage_ratio == pytest.approx(1 - rep.n_feasible / rep.n_runs)
        assert [r.seed for r in runs[rep.point]] == [1, 2, 3, 4]
        used = [r.ee for r in runs[rep.point] if r.feasible]
        assert (rep.ee_mean, rep.ee_ci) == pytest.approx(mc.confidence_interval(used))
    low = [r for r in reports if r.point.r_min_bps == 1e4]
    assert all(r.outage_ratio == 0 for r in low)
    assert tuple(reports[0].row()) == mc.REPORT_COLUMNS


def test_common_mode_uses_shared_draws(small_campaign):
    _, runs = small_campaign
    keep = mc.common_feasible_seeds(runs)
    for rep in mc.summarize(runs, common=True):
        assert rep.common_draws
        assert rep.n_averaged == len(keep[rep.point.draw_group])


def test_deterministic_csv(tmp_path, small_campaign):
    reports, _ = small_campaign
    again, _ = mc.run_campaign(CFG, SMALL, 4, base_seed=0, jobs=2)
    mc.write_reports(reports, tmp_path / "a.csv")
    mc.write_reports(again, tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_user_table(tmp_path, small_campaign):
    _, runs = small_campaign
    path = tmp_path / "users.csv"
    mc.write_user_table(runs, path)
    lines = path.read_text().splitlines()
    assert lines[0].split(",") == list(mc.USER_COLUMNS)
    n_feasible = sum(r.feasible for rs in runs.values() for r in rs)
    assert len(lines) == 1 + 5 * n_feasible
    assert {line.split(",")[7] for line in lines[1:]} == {"head", "middle", "edge"}


@pytest.mark.parametrize("n", [0, 1])
def test_campaign_needs_two_runs(n):
    with pytest.raises(ValueError):
        mc.run_campaign(CFG, SMALL, n)


def test_sweep_parsing():
    sw = mc.sweep_from_mapping({"r_min_bps": [1e6], "kappa_w": [0, 2.5], "schemes": ["noma", "ilo"], "pcm_eval": ["pcm1", "pcmk"]})
    assert sw.kappa_w == (0.0, 2.5)
    assert sw.scenarios == ((Scenario.NOMA, Algorithm.GLOBAL), (Scenario.NOMA, Algorithm.ILO))
    assert len(sw.points()) == 4
    for bad in ({"kappa_w": [0]}, {"r_min_bps": [], "kappa_w": [0]}, {"r_min_bps": 1e6, "kappa_w": [0]}):
        with pytest.raises(ValueError):
            mc.sweep_from_mapping(bad)
    with pytest.raises(ValueError):
        mc.sweep_from_mapping({"r_min_bps": [1e6], "kappa_w": [0], "schemes": ["tdma"]})
