"""One Monte Carlo trial of a scenario: drop, nulling radius, powers, metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import powerctl
from .asymptotics import AsymptoticParams, solve_optimal_s
from .config import ConfigError, ScenarioConfig
from .geometry import TorusWindow, build_realization, with_nulling_radius
from .metrics import LinkMetrics, PowerAllocation, evaluate_network
from .seeding import GEOMETRY, POWER_SAMPLES, rng_for


def nulling_s(cfg: ScenarioConfig, L: int, mean_power: float | None = None) -> float:
    """The s with D = s sqrt(L) in force at antenna count L (for predictions)."""
    rule = cfg.nulling
    if rule.kind == "explicit":
        return rule.radius / math.sqrt(L)
    if rule.kind == "scaled":
        return rule.s * L ** (rule.beta - 0.5)
    p = base_params(cfg, L, s=0.0, mean_power=cfg.peak_power if mean_power is None else mean_power)
    return rule.s_factor * solve_optimal_s(p)


def nulling_radius(cfg: ScenarioConfig, L: int) -> float:
    rule = cfg.nulling
    if rule.kind == "explicit":
        return float(rule.radius)
    if rule.kind == "scaled":
        return rule.s * L**rule.beta
    return nulling_s(cfg, L) * math.sqrt(L)


def base_params(cfg: ScenarioConfig, L: int, s: float | None = None, mean_power: float | None = None) -> AsymptoticParams:
    """Prediction parameters at antenna count L; mu is the effective L-dependent one."""
    if s is None:
        s = nulling_s(cfg, L)
    return AsymptoticParams(
        bs_density=cfg.bs_density,
        mobiles_per_bs=cfg.mobiles_per_bs,
        alpha=cfg.pathloss_exp,
        s=s,
        beta=0.5,
        mu=cfg.effective_mu(L),
        mean_power=cfg.peak_power if mean_power is None else mean_power,
        peak_power=cfg.peak_power,
        cell_radius=cfg.cell_radius,
    )


def validate_geometry(cfg: ScenarioConfig) -> None:
    dmax = max(nulling_radius(cfg, L) for L in cfg.antennas)
    if cfg.side < 4 * dmax:
        raise ConfigError(f"window side {cfg.side:.4g} km is below 4 x max nulling radius {dmax:.4g} km")


@dataclass(frozen=True)
class PowerPlan:
    """Network-wide outcome of the power policy at one L: the only values a BS
    needs besides its own mobile distances."""

    policy: str
    mean_power: float
    level: float = math.nan
    g: float = math.nan


@lru_cache(maxsize=64)
def _plan(cfg: ScenarioConfig, L: int) -> PowerPlan:
    if cfg.allocation == "equal":
        return PowerPlan("equal", cfg.peak_power)
    radii = powerctl.frozen_radii(cfg.placement, cfg.cell_radius, cfg.mobiles_per_bs, cfg.waterfill_samples,
                                  rng_for(cfg.seed, POWER_SAMPLES, L))
    sol = powerctl.optimize_mean_power(base_params(cfg, L), L, radii)
    return PowerPlan("waterfill", sol.mean_power, sol.level, sol.g)


def power_plan(cfg: ScenarioConfig, L: int) -> PowerPlan:
    return _plan(cfg, L)


def allocate_network(cfg: ScenarioConfig, plan: PowerPlan, serving_distance: np.ndarray) -> PowerAllocation:
    M, P = cfg.mobiles_per_bs, cfg.peak_power
    if plan.policy == "equal":
        phi = np.full(serving_distance.shape, P / M)
    else:
        gains = plan.g * serving_distance.reshape(-1, M) ** (-cfg.pathloss_exp)
        phi = powerctl.allocate(plan.level, gains, P).reshape(-1) if gains.size else np.zeros(0)
    return PowerAllocation(phi, M, P)


@dataclass
class TrialResult:
    L: int
    trial: int
    nulling_radius: float
    sigma2: float
    metrics: LinkMetrics
    powers: PowerAllocation

    @property
    def activation_fraction(self) -> float:
        a = self.metrics.active
        return float(a.mean()) if a.size else math.nan

    @property
    def bs_throughput(self) -> np.ndarray:
        M = self.powers.mobiles_per_bs
        return self.metrics.rate.reshape(-1, M).sum(axis=1)


def run_trial(cfg: ScenarioConfig, trial: int, antennas=None, plans: dict | None = None) -> list[TrialResult]:
    """Simulate one drop for every L of the sweep (same geometry for all L).

    ``plans`` maps L to a precomputed PowerPlan, so worker processes need not
    redo the network-wide power optimization.
    """
    validate_geometry(cfg)
    antennas = cfg.antennas if antennas is None else antennas
    window = TorusWindow(cfg.side)
    base = build_realization(cfg.bs_density, cfg.mobiles_per_bs, cfg.cell_radius, cfg.placement, window,
                             0.0, rng_for(cfg.seed, GEOMETRY, trial))
    out = []
    for L in antennas:
        D = nulling_radius(cfg, L)
        net = with_nulling_radius(base, D)
        plan = plans[L] if plans and L in plans else power_plan(cfg, L)
        powers = allocate_network(cfg, plan, net.serving_distance())
        sigma2 = cfg.noise_variance(L)
        m = evaluate_network(net, L, cfg.pathloss_exp, powers, sigma2, cfg.seed, trial)
        out.append(TrialResult(L, trial, D, sigma2, m, powers))
    return out
