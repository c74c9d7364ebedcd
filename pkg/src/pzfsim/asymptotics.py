"""Closed-form large-antenna predictions.

All interference terms use the s^(2 - alpha) scaling of the nulling radius
D = s sqrt(L).
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .config import ConfigError, PlacementMode
from .geometry import sample_radii


@dataclass(frozen=True)
class AsymptoticParams:
    bs_density: float
    mobiles_per_bs: int
    alpha: float
    s: float = 0.0
    beta: float = 0.5
    mu: float = 0.0
    zeta: float | None = None
    mean_power: float = 1.0
    peak_power: float = 1.0
    cell_radius: float = 0.15
    # envelope |xi(r)| <= delta r^-gamma on the distance dependence of BS power
    delta: float = 0.0
    gamma: float = 1.0

    def __post_init__(self):
        if self.alpha <= 2:
            raise ConfigError("alpha must exceed 2")
        if not 0 < self.beta <= 0.5:
            raise ConfigError("beta must lie in (0, 0.5]")
        if self.beta == 0.5 and self.load() >= 1:
            raise ConfigError("need s^2 pi lambda_b M < 1 when beta = 1/2")
        if self.mu < 0 or self.mean_power < 0:
            raise ConfigError("mu and mean power must be nonnegative")

    @property
    def noise_exponent(self) -> float:
        return self.alpha / 2 - 1 if self.zeta is None else self.zeta

    def load(self, s: float | None = None) -> float:
        """Fraction of antennas spent on nulling: s^2 pi lambda_b M."""
        s = self.s if s is None else s
        return s * s * math.pi * self.bs_density * self.mobiles_per_bs

    def replace(self, **kw) -> "AsymptoticParams":
        return dataclasses.replace(self, **kw)


class Regime(str, enum.Enum):
    NOISE_LIMITED = "noise_limited"
    INTERFERENCE_LIMITED = "interference_limited"
    MIXED = "mixed"


@dataclass(frozen=True)
class SinrLimit:
    exponent: float
    coefficient: float
    regime: Regime


def interference_constant(p: AsymptoticParams, s: float | None = None, mean_power: float | None = None) -> float:
    """s^(2-alpha) 2 pi Pbar lambda_b / (alpha - 2)."""
    s = p.s if s is None else s
    pbar = p.mean_power if mean_power is None else mean_power
    return s ** (2 - p.alpha) * 2 * math.pi * pbar * p.bs_density / (p.alpha - 2)


def sinr_limit(p: AsymptoticParams, phi_sq: float, r: float) -> SinrLimit:
    """Limit of L^-exponent * SINR for a mobile at distance r with power phi_sq."""
    zeta = p.noise_exponent
    crit = p.beta * (p.alpha - 2)
    sig = phi_sq * r ** (-p.alpha)
    s_tilde_load = p.load() if p.beta == 0.5 else 0.0
    if zeta < crit:
        return SinrLimit(1 + zeta, (1 - s_tilde_load) * sig / p.mu, Regime.NOISE_LIMITED)
    mu_tilde = p.mu if math.isclose(zeta, crit) else 0.0
    denom = interference_constant(p) + mu_tilde
    regime = Regime.MIXED if mu_tilde > 0 or math.isclose(zeta, crit) else Regime.INTERFERENCE_LIMITED
    return SinrLimit(1 + crit, (1 - s_tilde_load) * sig / denom, regime)


def finite_L_normalized_prediction(p: AsymptoticParams, L: int, sigma2: float | None = None) -> float:
    """Predicted normalized SINR at L antennas (beta = 1/2).

    With ``sigma2`` given the noise term is sigma2 L^(alpha/2 - 1) (fixed
    noise); otherwise the constant ``p.mu`` is used.
    """
    noise = p.mu if sigma2 is None else sigma2 * L ** (p.alpha / 2 - 1)
    return (1 - p.load()) / (interference_constant(p) + noise)


def optimal_s_residual(p: AsymptoticParams, s: float) -> float:
    return (p.alpha / (p.alpha - 2) * math.pi * p.bs_density * s * s
            + p.mu / p.mean_power * s ** p.alpha - 1.0 / p.mobiles_per_bs)


def solve_optimal_s(p: AsymptoticParams) -> float:
    """Positive root of alpha/(alpha-2) pi lambda_b s^2 + (mu/Pbar) s^alpha = 1/M.

    The left side increases strictly from 0, so bisection on
    [0, 1/sqrt(pi lambda_b M)] always brackets the unique root.
    """
    if p.mean_power <= 0:
        raise ConfigError("mean power must be positive")
    lo, hi = 0.0, 1.0 / math.sqrt(math.pi * p.bs_density * p.mobiles_per_bs)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if optimal_s_residual(p, mid) > 0:
            hi = mid
        else:
            lo = mid
    return lo if abs(optimal_s_residual(p, lo)) <= abs(optimal_s_residual(p, hi)) else hi


def optimal_s_noiseless(bs_density: float, M: int, alpha: float) -> float:
    return math.sqrt((alpha - 2) / (alpha * math.pi * bs_density * M))


def optimal_radius(p: AsymptoticParams, L: int) -> float:
    """D* = s* sqrt(L)."""
    if L <= 0:
        return 0.0
    return solve_optimal_s(p) * math.sqrt(L)


def asymptotic_rate(p: AsymptoticParams, L: int, phi_sq, r):
    """Large-L spectral efficiency of one link (vectorized over phi_sq, r)."""
    phi_sq = np.asarray(phi_sq, dtype=float)
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        snr = L ** (p.alpha / 2) * (1 - p.load()) * phi_sq * r ** (-p.alpha) / (interference_constant(p) + p.mu)
    out = np.log2(1.0 + snr)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ThroughputEstimate:
    mean: float
    stderr: float
    n_samples: int


def asymptotic_throughput(p: AsymptoticParams, L: int, allocate, placement: PlacementMode,
                          mc_samples: int, rng: np.random.Generator) -> ThroughputEstimate:
    """Mean per-BS sum of asymptotic link rates over the in-cell placement law.

    ``allocate`` maps an (n, M) array of serving distances to an (n, M)
    array of powers.
    """
    placement = PlacementMode(placement)
    M = p.mobiles_per_bs
    if placement is PlacementMode.CELL_EDGE:
        r = np.full((1, M), p.cell_radius)
        val = float(asymptotic_rate(p, L, allocate(r), r).sum())
        return ThroughputEstimate(val, 0.0, mc_samples)
    r = sample_radii(placement, p.cell_radius, (mc_samples, M), rng)
    per = asymptotic_rate(p, L, allocate(r), r).sum(axis=1)
    return ThroughputEstimate(float(per.mean()), float(per.std(ddof=1) / math.sqrt(mc_samples)), mc_samples)


def regularized_gamma_q(a: int, z: float) -> float:
    """Q(a, z) = Gamma(a, z)/Gamma(a): probability that a Poisson(z) count is below a."""
    if a < 1:
        raise ValueError("a must be a positive integer")
    if z < 0:
        raise ValueError("z must be nonnegative")
    return float(special.gammaincc(a, z))


def activation_prob_bounds(p: AsymptoticParams, L: int, D: float) -> tuple[float, float]:
    """Bracket for the probability that a BS far from the typical mobile is active."""
    a = L // p.mobiles_per_bs
    R = p.cell_radius
    lower = regularized_gamma_q(a, math.pi * p.bs_density * (D + R) ** 2) if a >= 1 else 0.0
    upper = regularized_gamma_q(a + 1, math.pi * p.bs_density * max(D - R, 0.0) ** 2)
    return lower, upper


def interference_mean_bounds(p: AsymptoticParams, L: int, D: float) -> tuple[float, float]:
    """Lower and upper bounds on the mean interference with nulling radius D > R."""
    if D <= p.cell_radius:
        raise ValueError("bounds need D > R")
    lo_a, hi_a = activation_prob_bounds(p, L, D)
    base = 2 * math.pi * p.bs_density * D ** (2 - p.alpha) / (p.alpha - 2)
    corr = p.delta * D ** (-p.gamma) * (p.alpha - 2) / (p.alpha + p.gamma - 2)
    return lo_a * base * (p.mean_power - corr), hi_a * base * (p.mean_power + corr)


def interference_limit(bs_density: float, mean_power: float, alpha: float) -> float:
    """lim D^(alpha-2) I = 2 pi Pbar lambda_b / (alpha - 2)."""
    return 2 * math.pi * mean_power * bs_density / (alpha - 2)
