"""Downlink SINR and achievable rates for conventional NOMA and JTCN.

Every rate in the network is ``omega B log2(1 + S p / (W p + n))`` for a
user-by-link signal matrix ``S`` and interference matrix ``W`` (both built
from the CNR table and the SIC order) and a normalized noise term ``n``
(``omega`` for a plain cell). :class:`LinkModel` holds those matrices; the
literal per-equation forms :func:`sinr_noma` and :func:`sinr_comp` are kept
as independent references.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import CnrTable, Topology
from .config import NetworkConfig, Scenario


@dataclass(frozen=True)
class PowerAllocation:
    """Transmit power (W) of every (user, BS) link of ``topology``."""

    topology: Topology
    powers: np.ndarray

    @property
    def scenario(self) -> Scenario:
        return self.topology.scenario

    def per_bs(self) -> np.ndarray:
        return np.bincount(self.topology.link_bs, weights=self.powers, minlength=self.topology.n_bs)

    def power(self, user: int, bs: int) -> float:
        return float(self.powers[self.topology.link_index(user, bs)])

    def ranked(self) -> list[np.ndarray]:
        """p[b][i]: power of the (i+1)-th user of BS b in SIC order."""
        return [self.powers[self.topology.link_bs == b] for b in range(self.topology.n_bs)]

    def user_power(self) -> np.ndarray:
        return np.bincount(self.topology.link_user, weights=self.powers, minlength=self.topology.n_users)


@dataclass(frozen=True)
class LinkModel:
    topology: Topology
    users: np.ndarray  # global user id of each row
    signal: np.ndarray  # (n_rows, n_links)
    interference: np.ndarray  # (n_rows, n_links)
    noise: np.ndarray  # (n_rows,), normalized by B N0
    bandwidth: float  # omega * B

    @property
    def n_links(self) -> int:
        return self.signal.shape[1]

    def sinr(self, p: np.ndarray) -> np.ndarray:
        return (self.signal @ p) / (self.interference @ p + self.noise)

    def rates(self, p: np.ndarray) -> np.ndarray:
        return self.bandwidth * np.log2(1.0 + self.sinr(p))

    def own_links(self, row: int) -> np.ndarray:
        return np.flatnonzero(self.signal[row] > 0)

    def restrict(self, bs: int, p: np.ndarray) -> "LinkModel":
        """Model seen by BS ``bs`` alone, with every other BS's power frozen into the noise.

        Only meaningful for conventional NOMA, where each user has one serving BS.
        """
        topo = self.topology
        local = topo.link_bs == bs
        members = topo.clusters[bs]
        rows = np.array([int(np.flatnonzero(self.users == u)[0]) for u in members], dtype=int)
        noise = self.noise[rows] + self.interference[np.ix_(rows, ~local)] @ p[~local]
        local_topo = Topology(
            scenario=topo.scenario,
            n_users=topo.n_users,
            clusters=(members,),
            edge_user=topo.edge_user,
            edge_bs=0 if topo.edge_user in members else None,
        )
        return LinkModel(
            topology=local_topo,
            users=self.users[rows],
            signal=self.signal[np.ix_(rows, local)],
            interference=self.interference[np.ix_(rows, local)],
            noise=noise,
            bandwidth=self.bandwidth,
        )


def build_link_model(cnr: CnrTable, topology: Topology, omega: float, bandwidth_b: float) -> LinkModel:
    """Signal/interference matrices for a topology.

    A user cancels (by SIC) the signals of weaker users in every cluster it
    belongs to; signals of stronger users there, and everything sent by BSs
    that do not serve it, is interference.
    """
    links = topology.links
    rank = {link: r for link, r in zip(links, topology.link_rank)}
    n_users, n_links = topology.n_users, len(links)
    signal = np.zeros((n_users, n_links))
    interference = np.zeros((n_users, n_links))
    for u in range(n_users):
        serving = topology.serving(u)
        for l, (v, b) in enumerate(links):
            g = cnr.cnr[u, b]
            if v == u:
                signal[u, l] = g
            elif b not in serving or rank[(v, b)] < rank[(u, b)]:
                interference[u, l] = g
    return LinkModel(
        topology=topology,
        users=np.arange(n_users),
        signal=signal,
        interference=interference,
        noise=np.full(n_users, float(omega)),
        bandwidth=omega * bandwidth_b,
    )


def link_model(cnr: CnrTable, cfg: NetworkConfig, scenario: Scenario | None = None, edge_bs: int = 0) -> LinkModel:
    return build_link_model(cnr, cnr.topology(scenario, edge_bs), cfg.omega, cfg.bandwidth_b)


def user_rates(alloc: PowerAllocation, cnr: CnrTable, cfg: NetworkConfig) -> np.ndarray:
    model = build_link_model(cnr, alloc.topology, cfg.omega, cfg.bandwidth_b)
    return model.rates(alloc.powers)


def rate_noma(alloc: PowerAllocation, cnr: CnrTable, cfg: NetworkConfig) -> np.ndarray:
    if alloc.scenario is not Scenario.NOMA:
        raise ValueError("rate_noma needs a conventional-NOMA allocation")
    return user_rates(alloc, cnr, cfg)


def rate_jtcn(alloc: PowerAllocation, cnr: CnrTable, cfg: NetworkConfig) -> np.ndarray:
    if alloc.scenario is not Scenario.JTCN:
        raise ValueError("rate_jtcn needs a JTCN allocation")
    return user_rates(alloc, cnr, cfg)


def ranked_gains(cnr: CnrTable, topology: Topology) -> list[np.ndarray]:
    """h[b][i, b']: CNR between BS b' and the (i+1)-th user of BS b."""
    return [cnr.cnr[list(members), :] for members in topology.clusters]


def sinr_noma(i: int, b: int, p: Sequence[np.ndarray], h: Sequence[np.ndarray], omega: float) -> float:
    """SINR of the (i+1)-th user of BS b, written term by term.

    ``p[b][j]`` is the power of the (j+1)-th user of BS b, ``h[b][j, b']`` the
    CNR from BS b' to that user (indices are 0-based).
    """
    inter_cell = sum(
        p[bp][j] * h[b][i, bp] for bp in range(len(p)) if bp != b for j in range(len(p[bp]))
    )
    intra_cluster = sum(p[b][j] * h[b][i, b] for j in range(i))
    return p[b][i] * h[b][i, b] / (inter_cell + intra_cluster + omega)


def sinr_comp(p: Sequence[np.ndarray], h: Sequence[np.ndarray], omega: float) -> float:
    """SINR of the CoMP user, last in every cluster: all BSs contribute useful power
    and only the non-CoMP signals of each cluster interfere."""
    useful = sum(p[b][-1] * h[b][-1, b] for b in range(len(p)))
    intra = sum(p[b][j] * h[b][-1, b] for b in range(len(p)) for j in range(len(p[b]) - 1))
    return useful / (intra + omega)


def decoding_count(i: int, cluster_size: int) -> int:
    """Number of decodings (SIC layers + own signal) done by the i-th user, 1-based."""
    if not 1 <= i <= cluster_size:
        raise ValueError(f"user rank {i} outside 1..{cluster_size}")
    return cluster_size - i + 1
