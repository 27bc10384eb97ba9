"""Network power consumption under PCM-1, PCM-2, PCM-3 (rate-linear) and PCM-kappa."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import Topology
from .config import NetworkConfig, Pcm
from .rates import PowerAllocation


@dataclass(frozen=True)
class PowerBreakdown:
    transmit: float
    circuit: float
    signal_processing: float
    sic: float

    @property
    def total(self) -> float:
        return self.transmit + self.circuit + self.signal_processing + self.sic

    def as_dict(self) -> dict[str, float]:
        return {
            "transmit_w": self.transmit,
            "circuit_w": self.circuit,
            "signal_processing_w": self.signal_processing,
            "sic_w": self.sic,
            "total_w": self.total,
        }


def decodings(topology: Topology) -> np.ndarray:
    """J_b - i + 1 for every link."""
    return topology.link_cluster_size - topology.link_rank + 1


def consumption(
    pcm: Pcm,
    alloc: PowerAllocation,
    cfg: NetworkConfig,
    rates: np.ndarray | None = None,
) -> PowerBreakdown:
    topo = alloc.topology
    transmit = float(np.sum(alloc.powers))
    if pcm is Pcm.PCM1:
        return PowerBreakdown(transmit, 0.0, 0.0, 0.0)
    circuit = topo.n_bs * cfg.p_fix
    if pcm is Pcm.PCM2:
        return PowerBreakdown(transmit, circuit, 0.0, 0.0)
    if pcm is Pcm.PCM3:
        if rates is None:
            raise ValueError("PCM-3 needs the user rates")
        return PowerBreakdown(transmit, circuit, cfg.rho_rate * float(np.sum(rates)), 0.0)
    return PowerBreakdown(
        transmit,
        circuit,
        cfg.rho * transmit,
        cfg.kappa * float(np.sum(decodings(topo))),
    )


def affine_coeffs(pcm: Pcm, topology: Topology, cfg: NetworkConfig) -> tuple[float, float]:
    """(alpha, beta) with P(p) = alpha * sum(p) + beta; PCM-3 is not affine in p."""
    if pcm is Pcm.PCM1:
        return 1.0, 0.0
    if pcm is Pcm.PCM2:
        return 1.0, topology.n_bs * cfg.p_fix
    if pcm is Pcm.PCMK:
        return 1.0 + cfg.rho, topology.n_bs * cfg.p_fix + cfg.kappa * float(np.sum(decodings(topology)))
    raise ValueError("PCM-3 depends on the rates and cannot be used inside the optimizer")


def receiver_side_power(alloc: PowerAllocation, cfg: NetworkConfig) -> np.ndarray:
    """Per-user (1 + rho) p + (J_b - i + 1) kappa, summed over the user's links."""
    topo = alloc.topology
    per_link = (1.0 + cfg.rho) * alloc.powers + cfg.kappa * decodings(topo)
    return np.bincount(topo.link_user, weights=per_link, minlength=topo.n_users)
