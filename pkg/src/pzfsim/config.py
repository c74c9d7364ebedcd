"""Scenario configuration for network simulations and campaigns."""

from __future__ import annotations

import dataclasses
import enum
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any


class PlacementMode(str, enum.Enum):
    """How the M mobiles of a base station are placed around it."""

    CELL_EDGE = "cell_edge"
    UNIFORM_DISK = "uniform_disk"


class ConfigError(ValueError):
    """Raised for physically or numerically invalid scenario parameters."""


@dataclass(frozen=True)
class NoiseSpec:
    """Receiver noise law.

    ``mode="scaled"`` gives ``sigma2 = mu * L**-zeta``; ``mode="fixed"`` gives a
    constant ``sigma2``. Either can instead be calibrated from a cell-edge SNR
    (``edge_snr_db``), in which case ``mu``/``sigma2`` are derived from the
    peak power and cell radius of the scenario. For the scaled mode the SNR is
    the one seen with ``ref_antennas`` antennas.
    """

    mode: str = "fixed"
    mu: float | None = None
    zeta: float | None = None
    sigma2: float | None = None
    edge_snr_db: float | None = None
    ref_antennas: int = 1

    def __post_init__(self):
        if self.mode not in ("scaled", "fixed"):
            raise ConfigError(f"unknown noise mode {self.mode!r}")
        if self.mode == "fixed" and self.sigma2 is None and self.edge_snr_db is None:
            raise ConfigError("fixed noise needs sigma2 or edge_snr_db")
        if self.mode == "scaled" and self.mu is None and self.edge_snr_db is None:
            raise ConfigError("scaled noise needs mu or edge_snr_db")


@dataclass(frozen=True)
class NullingRule:
    """How the zero-forcing radius D is chosen for a given antenna count.

    kind:
      ``"explicit"`` -- D = ``radius`` for every L.
      ``"scaled"``   -- D = s * L**beta.
      ``"optimal"``  -- D = s* sqrt(L), s* the root of the stationarity
                        condition for the noise level in force at that L,
                        optionally multiplied by ``s_factor``.
    """

    kind: str = "optimal"
    radius: float | None = None
    s: float | None = None
    beta: float = 0.5
    s_factor: float = 1.0

    def __post_init__(self):
        if self.kind not in ("explicit", "scaled", "optimal"):
            raise ConfigError(f"unknown nulling rule {self.kind!r}")
        if self.kind == "explicit" and (self.radius is None or self.radius < 0):
            raise ConfigError("explicit nulling rule needs radius >= 0")
        if self.kind == "scaled" and (self.s is None or self.s < 0):
            raise ConfigError("scaled nulling rule needs s >= 0")


@dataclass(frozen=True)
class ScenarioConfig:
    """All physical and numerical parameters of one experiment.

    Distances are in km, densities in BS/km^2, powers in normalized units.
    """

    bs_density: float = 30.0
    mobiles_per_bs: int = 3
    antennas: tuple[int, ...] = (25, 50, 100, 200)
    pathloss_exp: float = 4.0
    cell_radius: float = 0.15
    peak_power: float = 1.0
    noise: NoiseSpec = field(default_factory=lambda: NoiseSpec("fixed", edge_snr_db=6.0))
    nulling: NullingRule = field(default_factory=NullingRule)
    placement: PlacementMode = PlacementMode.UNIFORM_DISK
    allocation: str = "equal"
    expected_bs: float = 200.0
    trials: int = 5
    seed: int = 0
    workers: int = 1
    waterfill_samples: int = 100_000

    def __post_init__(self):
        object.__setattr__(self, "antennas", tuple(int(x) for x in self.antennas))
        object.__setattr__(self, "placement", PlacementMode(self.placement))
        if self.pathloss_exp <= 2:
            raise ConfigError("path-loss exponent must exceed 2")
        if self.bs_density <= 0 or self.expected_bs <= 0:
            raise ConfigError("BS density and expected BS count must be positive")
        if self.cell_radius <= 0 or self.peak_power <= 0:
            raise ConfigError("cell radius and peak power must be positive")
        if self.mobiles_per_bs < 1:
            raise ConfigError("need at least one mobile per BS")
        if not self.antennas:
            raise ConfigError("empty antenna sweep")
        if any(L < self.mobiles_per_bs for L in self.antennas):
            raise ConfigError("every L in the sweep must satisfy M <= L")
        if self.allocation not in ("equal", "waterfill"):
            raise ConfigError(f"unknown allocation policy {self.allocation!r}")
        if self.trials < 1 or self.workers < 1:
            raise ConfigError("trials and workers must be >= 1")

    @property
    def side(self) -> float:
        """Torus window side, chosen so the Poisson mean BS count is ``expected_bs``."""
        return math.sqrt(self.expected_bs / self.bs_density)

    def noise_variance(self, L: int) -> float:
        from .metrics import noise_variance

        return noise_variance(self.resolved_noise(), L)

    def resolved_noise(self) -> NoiseSpec:
        """Noise law with any edge-SNR calibration turned into mu/sigma2."""
        n = self.noise
        if n.edge_snr_db is None:
            if n.mode == "scaled" and n.zeta is None:
                return dataclasses.replace(n, zeta=self.pathloss_exp / 2 - 1)
            return n
        edge = self.peak_power * self.cell_radius ** (-self.pathloss_exp)
        snr = 10 ** (n.edge_snr_db / 10)
        if n.mode == "fixed":
            return NoiseSpec("fixed", sigma2=edge / snr)
        zeta = self.pathloss_exp / 2 - 1 if n.zeta is None else n.zeta
        mu = n.ref_antennas ** zeta * edge / snr
        return NoiseSpec("scaled", mu=mu, zeta=zeta)

    def effective_mu(self, L: int) -> float:
        """Noise coefficient seen by the beta=1/2 predictions at antenna count L.

        This is sigma2(L) * L**(alpha/2 - 1); it is the constant mu in the scaled
        mode with zeta = alpha/2 - 1 and grows with L for fixed noise.
        """
        return self.noise_variance(L) * L ** (self.pathloss_exp / 2 - 1)

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["placement"] = self.placement.value
        d["antennas"] = list(self.antennas)
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ScenarioConfig":
        d = dict(d)
        if isinstance(d.get("noise"), dict):
            d["noise"] = NoiseSpec(**d["noise"])
        if isinstance(d.get("nulling"), dict):
            d["nulling"] = NullingRule(**d["nulling"])
        if "antennas" in d:
            d["antennas"] = tuple(d["antennas"])
        unknown = set(d) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)

    def config_hash(self) -> str:
        """Stable short hash of everything that affects the numbers produced.

        ``workers`` is excluded: results must not depend on it.
        """
        d = self.to_dict()
        d.pop("workers")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]
