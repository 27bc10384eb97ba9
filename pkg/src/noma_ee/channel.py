"""User placement, Rayleigh fading and normalized channel gains (CNR)."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .config import ConfigError, NetworkConfig, Scenario

# Independent RNG streams derived from one seed.
_PLACEMENT_STREAM = 0
_FADING_STREAM = 1


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), stream]))


@dataclass(frozen=True)
class Placement:
    bs_positions: np.ndarray  # (n_bs, 2), metres
    user_positions: np.ndarray  # (n_users, 2)
    home_bs: np.ndarray  # (n_users,), serving BS of non-CoMP users, -1 for the cell-edge user
    distances: np.ndarray  # (n_users, n_bs), distance from BS b' to user u

    @property
    def edge_user(self) -> int:
        return int(np.flatnonzero(self.home_bs < 0)[0])


@dataclass(frozen=True)
class ChannelDraw:
    gain: np.ndarray  # (n_users, n_bs), |h|^2 linear
    seed: int
    placement: Placement


@dataclass(frozen=True)
class Topology:
    """Cluster membership and SIC order of every BS.

    ``clusters[b]`` lists user ids served by BS b, cluster head first and
    the weakest user last. A power variable exists for every (user, BS)
    pair in ``links``.
    """

    scenario: Scenario
    n_users: int
    clusters: tuple[tuple[int, ...], ...]
    edge_user: int
    edge_bs: int | None  # BS serving the cell-edge user in conventional NOMA

    @property
    def n_bs(self) -> int:
        return len(self.clusters)

    @cached_property
    def links(self) -> tuple[tuple[int, int], ...]:
        return tuple((u, b) for b, members in enumerate(self.clusters) for u in members)

    @cached_property
    def link_rank(self) -> np.ndarray:
        """1-based SIC rank i of each link inside its cluster."""
        return np.array([self.clusters[b].index(u) + 1 for u, b in self.links])

    @cached_property
    def link_cluster_size(self) -> np.ndarray:
        return np.array([len(self.clusters[b]) for _, b in self.links])

    @cached_property
    def link_bs(self) -> np.ndarray:
        return np.array([b for _, b in self.links], dtype=int)

    @cached_property
    def link_user(self) -> np.ndarray:
        return np.array([u for u, _ in self.links], dtype=int)

    def serving(self, user: int) -> tuple[int, ...]:
        return tuple(b for b, members in enumerate(self.clusters) if user in members)

    def link_index(self, user: int, bs: int) -> int:
        return self.links.index((user, bs))

    def heads(self) -> tuple[int, ...]:
        return tuple(members[0] for members in self.clusters if members)


@dataclass(frozen=True)
class CnrTable:
    """h~ = |h|^2 / (B N0) in 1/W for every (user, BS) pair."""

    cnr: np.ndarray  # (n_users, n_bs)
    home_bs: np.ndarray
    edge_user: int
    scenario: Scenario
    seed: int | None = None

    @property
    def n_users(self) -> int:
        return self.cnr.shape[0]

    @property
    def n_bs(self) -> int:
        return self.cnr.shape[1]

    def serving_cnr(self, user: int, bs: int) -> float:
        return float(self.cnr[user, bs])

    def best_bs(self, user: int) -> int:
        row = self.cnr[user]
        return int(np.flatnonzero(row == row.max())[0])

    def topology(self, scenario: Scenario | None = None, edge_bs: int = 0) -> Topology:
        """Clusters sorted by descending serving CNR (ties: lower user id first).

        In JTCN the CoMP user is forced to the last position in every cluster so
        the decoding order is consistent across BSs.
        """
        scenario = self.scenario if scenario is None else scenario
        clusters = []
        for b in range(self.n_bs):
            members = [int(u) for u in np.flatnonzero(self.home_bs == b)]
            members.sort(key=lambda u: (-self.cnr[u, b], u))
            if scenario is Scenario.JTCN:
                members.append(self.edge_user)
            elif b == edge_bs:
                members.append(self.edge_user)
                members.sort(key=lambda u: (-self.cnr[u, b], u))
            clusters.append(tuple(members))
        return Topology(
            scenario=scenario,
            n_users=self.n_users,
            clusters=tuple(clusters),
            edge_user=self.edge_user,
            edge_bs=None if scenario is Scenario.JTCN else edge_bs,
        )

    @property
    def sic_order(self) -> tuple[tuple[int, ...], ...]:
        return self.topology().clusters

    def to_csv(self, path: str | Path, topology: Topology | None = None) -> None:
        topo = topology or self.topology()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["user", "bs", "serving_bs", "cnr_per_watt"])
            for u in range(self.n_users):
                serving = topo.serving(u)
                label = "+".join(str(b + 1) for b in serving)
                for b in range(self.n_bs):
                    w.writerow([u + 1, b + 1, label, repr(float(self.cnr[u, b]))])


def bs_layout(n_bs: int, spacing: float) -> np.ndarray:
    """BSs on a regular polygon with side ``spacing`` (a segment for two BSs)."""
    if n_bs == 1:
        return np.zeros((1, 2))
    radius = spacing / (2.0 * math.sin(math.pi / n_bs))
    angles = math.pi + 2.0 * math.pi * np.arange(n_bs) / n_bs
    return np.column_stack([radius * np.cos(angles), radius * np.sin(angles)])


def _sample_intersection(bs: np.ndarray, radius: float, rng: np.random.Generator) -> np.ndarray:
    n_bs = len(bs)
    centre = bs.mean(axis=0)
    reach = np.max(np.linalg.norm(bs - centre, axis=1))
    if n_bs > 1 and math.isclose(reach, radius, rel_tol=1e-12, abs_tol=1e-9):
        return centre  # discs touch in a single point
    lo = np.max(bs - radius, axis=0)
    hi = np.min(bs + radius, axis=0)
    if n_bs == 2:
        half_chord = math.sqrt(max(radius**2 - reach**2, 0.0))
        axis = (bs[1] - bs[0]) / np.linalg.norm(bs[1] - bs[0])
        if abs(axis[1]) < 1e-12:
            lo[1], hi[1] = centre[1] - half_chord, centre[1] + half_chord
    for _ in range(1000):
        pts = rng.uniform(lo, hi, size=(256, 2))
        d = np.linalg.norm(pts[:, None, :] - bs[None, :, :], axis=2)
        ok = np.flatnonzero(np.all(d <= radius, axis=1))
        if ok.size:
            return pts[ok[0]]
    raise ConfigError("inter_bs_distance", "coverage intersection too small to sample from")


def place_users(cfg: NetworkConfig, seed: int) -> Placement:
    """Non-CoMP users at fixed radial distances with random azimuth; one cell-edge
    user uniform over the intersection of all coverage discs."""
    bs = bs_layout(cfg.n_bs, cfg.inter_bs_distance)
    centre = bs.mean(axis=0)
    if cfg.n_bs > 1 and np.max(np.linalg.norm(bs - centre, axis=1)) > cfg.cell_radius * (1 + 1e-12):
        raise ConfigError(
            "inter_bs_distance",
            "coverage discs of the BSs do not intersect "
            f"(inter_bs_distance={cfg.inter_bs_distance} m, cell_radius={cfg.cell_radius} m)",
        )
    rng = _rng(seed, _PLACEMENT_STREAM)
    positions, home = [], []
    for b in range(cfg.n_bs):
        for d in cfg.non_comp_distances:
            phi = rng.uniform(0.0, 2.0 * math.pi)
            positions.append(bs[b] + d * np.array([math.cos(phi), math.sin(phi)]))
            home.append(b)
    positions.append(_sample_intersection(bs, cfg.cell_radius, rng))
    home.append(-1)
    users = np.array(positions)
    dist = np.linalg.norm(users[:, None, :] - bs[None, :, :], axis=2)
    return Placement(bs_positions=bs, user_positions=users, home_bs=np.array(home), distances=dist)


def path_loss_db(d: float | np.ndarray) -> float | np.ndarray:
    """3GPP macro urban: 128.1 + 37.6 log10(d / 1 km)."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    out = 128.1 + 37.6 * np.log10(d / 1000.0)
    return float(out) if out.ndim == 0 else out


def path_loss_linear(d: float | np.ndarray) -> float | np.ndarray:
    return 10.0 ** (-path_loss_db(d) / 10.0)


def draw_channel(placement: Placement, seed: int, fading: bool = True) -> ChannelDraw:
    """|h|^2 = path loss x Exp(1) per link. ``fading=False`` pins the fading to 1."""
    pl = path_loss_linear(placement.distances)
    if fading:
        pl = pl * _rng(seed, _FADING_STREAM).exponential(1.0, size=pl.shape)
    return ChannelDraw(gain=pl, seed=seed, placement=placement)


def cnr_table(draw: ChannelDraw, cfg: NetworkConfig) -> CnrTable:
    cnr = draw.gain / (cfg.bandwidth_b * cfg.n0)
    if not np.all(np.isfinite(cnr) & (cnr > 0)):
        raise ValueError("channel gains must be positive and finite")
    return CnrTable(
        cnr=cnr,
        home_bs=draw.placement.home_bs,
        edge_user=draw.placement.edge_user,
        scenario=cfg.scenario,
        seed=draw.seed,
    )


def realize(cfg: NetworkConfig, seed: int, fading: bool = True) -> CnrTable:
    """Placement + fading + normalization for one seed."""
    return cnr_table(draw_channel(place_users(cfg, seed), seed, fading=fading), cfg)
