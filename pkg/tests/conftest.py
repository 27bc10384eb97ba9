import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from noma_ee.channel import CnrTable, Topology, realize
from noma_ee.config import NetworkConfig, Scenario
from noma_ee.rates import LinkModel, link_model

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def cfg() -> NetworkConfig:
    return NetworkConfig()


def make_cnr(cnr, home_bs, scenario=Scenario.NOMA) -> CnrTable:
    """CNR table from explicit numbers; the user with home_bs == -1 is the cell-edge user."""
    cnr = np.asarray(cnr, dtype=float)
    home = np.asarray(home_bs)
    return CnrTable(cnr=cnr, home_bs=home, edge_user=int(np.flatnonzero(home < 0)[0]), scenario=scenario)


def two_user_cell(cfg: NetworkConfig, seed: int) -> LinkModel:
    """BS1's cluster of a drawn network reduced to its near user and the cell-edge user, BS2 silent."""
    model = link_model(realize(cfg, seed), cfg, Scenario.NOMA, edge_bs=0)
    local = model.restrict(0, np.zeros(model.n_links))
    keep_users = (0, model.topology.edge_user)
    rows = [r for r, u in enumerate(local.users) if u in keep_users]
    links = [l for l, (u, _) in enumerate(local.topology.links) if u in keep_users]
    members = tuple(u for u in local.topology.clusters[0] if u in keep_users)
    topo = Topology(local.topology.scenario, local.topology.n_users, (members,), local.topology.edge_user, 0)
    return LinkModel(
        topology=topo,
        users=local.users[rows],
        signal=local.signal[np.ix_(rows, links)],
        interference=local.interference[np.ix_(rows, links)],
        noise=local.noise[rows],
        bandwidth=local.bandwidth,
    )


_acceptance_lines: list[str] = []


@pytest.fixture
def acceptance_line():
    """Record one summary line per acceptance criterion, printed after the run."""
    return _acceptance_lines.append


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
