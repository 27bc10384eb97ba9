"""Scenario parameters, unit helpers and config loading.

Everything inside the package works in linear SI units (W, Hz, bit/s, m).
dBm only shows up here, at the config boundary.
"""

from __future__ import annotations

import dataclasses
import enum
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

try:  # Python >= 3.11
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib


class ConfigError(ValueError):
    """Raised when a config violates an invariant. ``field`` names the culprit."""

    def __init__(self, field_name: str, message: str):
        super().__init__(message)
        self.field = field_name


class Scenario(enum.Enum):
    NOMA = "noma"
    JTCN = "jtcn"


class Pcm(enum.Enum):
    """Power consumption models.

    The numeric parameters (``p_fix``, ``rho``, ``kappa``, ``rho_rate``) are
    read from the :class:`NetworkConfig` the model is evaluated with.
    """

    PCM1 = "pcm1"  # radiated power only
    PCM2 = "pcm2"  # + fixed circuit power per BS
    PCM3 = "pcm3"  # + rate-linear signal processing, rho_rate * R
    PCMK = "pcmk"  # + (1 + rho) p and kappa per SIC decoding

    @property
    def optimizable(self) -> bool:
        return self is not Pcm.PCM3


class Algorithm(enum.Enum):
    GLOBAL = "global"
    ILO = "ilo"


def dbm_to_watts(x: float) -> float:
    return 10.0 ** ((x - 30.0) / 10.0)


def watts_to_dbm(x: float) -> float:
    return 10.0 * math.log10(x) + 30.0


@dataclass(frozen=True)
class SolverSettings:
    epsilon_dinkelbach: float = 1e-6
    epsilon_sca: float = 1e-6
    epsilon_inner: float = 1e-9  # barrier duality gap, in bit/s/Hz units
    l_max: int = 100
    barrier_t0: float = 1.0
    barrier_mu: float = 10.0


@dataclass(frozen=True)
class NetworkConfig:
    """Full scenario parameterization. Defaults are the two-cell reference
    network at R_min = 1.5 Mbit/s, kappa = 0.5 W."""

    n_bs: int = 2
    cell_radius: float = 600.0
    inter_bs_distance: float = 1000.0
    users_per_cluster: int = 3
    non_comp_distances: tuple[float, ...] = (30.0, 200.0)
    # A scalar applies to every user; a tuple gives one entry per user
    # (ordered as in channel.place_users).
    r_min: float | tuple[float, ...] = 1.5e6
    p_max: float = dbm_to_watts(43.0)
    bandwidth_b: float = 180e3
    omega: int = 100
    n0: float = dbm_to_watts(-139.0)  # W/Hz
    p_fix: float = dbm_to_watts(30.0)
    rho: float = 0.1
    kappa: float = 0.5
    rho_rate: float = 1e-8  # W per bit/s, PCM-3 only
    scenario: Scenario = Scenario.JTCN
    pcm_opt: Pcm = Pcm.PCMK
    pcm_eval: Pcm = Pcm.PCMK
    solver: SolverSettings = field(default_factory=SolverSettings)
    seed: int = 0

    @property
    def n_users(self) -> int:
        return self.n_bs * (self.users_per_cluster - 1) + 1

    def r_min_vector(self) -> tuple[float, ...]:
        if isinstance(self.r_min, (int, float)):
            return (float(self.r_min),) * self.n_users
        return tuple(float(r) for r in self.r_min)

    def replace(self, **changes: Any) -> "NetworkConfig":
        return dataclasses.replace(self, **changes)


def _require(ok: bool, name: str, message: str) -> None:
    if not ok:
        raise ConfigError(name, message)


def validate_config(cfg: NetworkConfig) -> NetworkConfig:
    """Return ``cfg`` unchanged if every invariant holds, else raise ConfigError
    for the first violated one."""
    _require(cfg.n_bs >= 1, "n_bs", "n_bs must be at least 1")
    _require(cfg.users_per_cluster >= 1, "users_per_cluster", "users_per_cluster must be at least 1")
    for name in ("cell_radius", "p_max", "bandwidth_b", "omega", "n0"):
        value = getattr(cfg, name)
        _require(math.isfinite(value) and value > 0, name, f"{name} must be positive")
    _require(
        math.isfinite(cfg.inter_bs_distance) and (cfg.inter_bs_distance > 0 or cfg.n_bs == 1),
        "inter_bs_distance",
        "inter_bs_distance must be positive",
    )
    for name in ("p_fix", "rho", "kappa", "rho_rate"):
        value = getattr(cfg, name)
        _require(math.isfinite(value) and value >= 0, name, f"{name} must be non-negative")
    expected = cfg.users_per_cluster - 1
    _require(
        len(cfg.non_comp_distances) == expected,
        "non_comp_distances",
        f"non_comp_distances has {len(cfg.non_comp_distances)} entries, expected "
        f"users_per_cluster - 1 = {expected}",
    )
    _require(
        all(d > 0 and math.isfinite(d) for d in cfg.non_comp_distances),
        "non_comp_distances",
        "non_comp_distances must be positive",
    )
    r_min = cfg.r_min_vector()
    _require(
        len(r_min) == cfg.n_users,
        "r_min",
        f"r_min has {len(r_min)} entries, expected one per user ({cfg.n_users})",
    )
    _require(all(r >= 0 and math.isfinite(r) for r in r_min), "r_min", "r_min must be non-negative")
    _require(isinstance(cfg.scenario, Scenario), "scenario", "scenario must be a Scenario")
    _require(isinstance(cfg.pcm_opt, Pcm), "pcm_opt", "pcm_opt must be a Pcm")
    _require(cfg.pcm_opt.optimizable, "pcm_opt", "PCM-3 cannot be used inside the optimizer")
    _require(isinstance(cfg.pcm_eval, Pcm), "pcm_eval", "pcm_eval must be a Pcm")
    s = cfg.solver
    for name in ("epsilon_dinkelbach", "epsilon_sca", "epsilon_inner"):
        _require(getattr(s, name) > 0, f"solver.{name}", f"solver.{name} must be positive")
    _require(s.l_max >= 1, "solver.l_max", "solver.l_max must be at least 1")
    _require(s.barrier_t0 > 0, "solver.barrier_t0", "solver.barrier_t0 must be positive")
    _require(s.barrier_mu > 1, "solver.barrier_mu", "solver.barrier_mu must exceed 1")
    return cfg


_POWER_FIELDS = {"p_max", "p_fix", "n0", "kappa"}
_DBM = re.compile(r"^\s*(-?[0-9.eE+-]+)\s*dBm(/Hz)?\s*$")


def parse_power(value: Any) -> float:
    """Accept ``19.95`` (W) or ``"43 dBm"`` / ``"-139 dBm/Hz"``."""
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        m = _DBM.match(value)
        if m:
            return dbm_to_watts(float(m.group(1)))
        try:
            return float(value)
        except ValueError:
            pass
    raise ValueError(f"cannot parse power value {value!r}")


def config_from_mapping(data: Mapping[str, Any]) -> NetworkConfig:
    known = {f.name for f in dataclasses.fields(NetworkConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(sorted(unknown)[0], f"unknown config key(s): {', '.join(sorted(unknown))}")
    kwargs: dict[str, Any] = {}
    for key, value in data.items():
        if key in _POWER_FIELDS:
            value = parse_power(value)
        elif key == "scenario":
            value = Scenario(value)
        elif key in ("pcm_opt", "pcm_eval"):
            value = Pcm(value)
        elif key == "non_comp_distances":
            value = tuple(float(v) for v in value)
        elif key == "r_min" and isinstance(value, list):
            value = tuple(float(v) for v in value)
        elif key == "solver":
            value = SolverSettings(**value)
        kwargs[key] = value
    return NetworkConfig(**kwargs)


def load_config(path: str | Path) -> NetworkConfig:
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    return validate_config(config_from_mapping(data))
