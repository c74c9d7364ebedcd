"""Per-mobile signal, interference, SINR and rate for one network drop."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import fading_block
from .config import NoiseSpec
from .precoder import PrecoderSet, bs_precoders

PEAK_SLACK = 1e-9


class PowerConstraintError(ValueError):
    pass


@dataclass
class PowerAllocation:
    """phi_sq[i] is the power BS b_i spends on mobile i."""

    phi_sq: np.ndarray
    mobiles_per_bs: int
    peak_power: float

    def __post_init__(self):
        self.phi_sq = np.asarray(self.phi_sq, dtype=float)
        if np.any(self.phi_sq < 0):
            raise PowerConstraintError("negative power")
        if self.max_bs_power() > self.peak_power + PEAK_SLACK:
            raise PowerConstraintError(
                f"BS power {self.max_bs_power():.12g} exceeds peak {self.peak_power}"
            )

    def bs_power(self) -> np.ndarray:
        return self.phi_sq.reshape(-1, self.mobiles_per_bs).sum(axis=1)

    def max_bs_power(self) -> float:
        return float(self.bs_power().max()) if self.phi_sq.size else 0.0


@dataclass
class LinkMetrics:
    signal: np.ndarray
    interference: np.ndarray
    sinr: np.ndarray
    rate: np.ndarray
    normalized_sinr: np.ndarray
    serving_distance: np.ndarray
    active: np.ndarray  # per BS


def noise_variance(noise: NoiseSpec, L: int) -> float:
    """sigma^2 = mu L^-zeta (scaled) or the fixed value."""
    if noise.mode == "scaled":
        return noise.mu * L ** (-noise.zeta)
    return noise.sigma2


def sinr_and_rate(S, I, sigma2):
    """SINR and spectral efficiency log2(1 + SINR) in bit/s/Hz."""
    if np.any(np.asarray(sigma2) <= 0):
        raise ValueError("noise variance must be positive")
    eta = np.asarray(S, dtype=float) / (np.asarray(I, dtype=float) + sigma2)
    return eta, np.log2(1.0 + eta)


def normalized_sinr(eta, L: int, alpha: float, phi_sq, r, literal: bool = False):
    """SINR divided by L^(alpha/2) phi^2 r^-alpha.

    ``literal=True`` divides by the amplitude phi instead of phi^2.
    """
    p = np.sqrt(phi_sq) if literal else np.asarray(phi_sq, dtype=float)
    return np.asarray(eta) / (L ** (alpha / 2) * p * np.asarray(r, dtype=float) ** (-alpha))


def signal_power(target_fading, weight, phi_sq: float, active: bool, r: float, alpha: float) -> float:
    """|phi a r^(-alpha/2) g^H w|^2."""
    if not active:
        return 0.0
    return float(phi_sq * r ** (-alpha) * abs(np.vdot(target_fading, weight)) ** 2)


def evaluate_network(net, L: int, alpha: float, powers: PowerAllocation, sigma2: float,
                     master_seed: int, trial: int = 0, literal_normalization: bool = False,
                     keep_precoders: bool = False):
    """Full metric evaluation of one drop.

    Walks the BSs once: each BS's fading block is generated, used for its
    beamformers, then for its interference onto every other mobile. Leakage
    onto nulled mobiles is summed, not zeroed.
    """
    n, M, K = net.n_mobiles, net.mobiles_per_bs, net.n_bs
    S = np.zeros(n)
    I = np.zeros(n)
    active = np.zeros(K, dtype=bool)
    weights = {} if keep_precoders else None
    gain = net.dist ** (-alpha) if n else np.zeros((0, 0))
    for k in range(K):
        F = fading_block(k, n, L, master_seed, trial)
        served = net.served_set(k)
        W = bs_precoders(F, served, net.nulled_sets[k], L)
        if W is None:
            continue
        active[k] = True
        if keep_precoders:
            weights[k] = W
        amp = np.abs(F.conj() @ W) ** 2  # (n, M): |g_{j,k}^H w_i|^2
        rx = amp * gain[:, k:k + 1] * powers.phi_sq[served][None, :]
        own = rx[served, np.arange(M)]
        S[served] = own
        I += rx.sum(axis=1)
        I[served] -= own
    r = net.serving_distance()
    eta, rate = sinr_and_rate(S, I, sigma2)
    with np.errstate(divide="ignore", invalid="ignore"):
        norm = normalized_sinr(eta, L, alpha, powers.phi_sq, r, literal=literal_normalization)
    lm = LinkMetrics(S, I, eta, rate, norm, r, active)
    if keep_precoders:
        return lm, PrecoderSet(active=active.copy(), weights=weights)
    return lm


def interference_power(j: int, net, L: int, alpha: float, precoders: PrecoderSet,
                       powers: PowerAllocation, master_seed: int, trial: int = 0) -> float:
    """Interference at mobile j summed stream by stream (reference path)."""
    from .channel import fading_vector

    M = net.mobiles_per_bs
    total = 0.0
    for k, W in precoders.weights.items():
        g = fading_vector(j, k, L, master_seed, trial)
        r = net.dist[j, k]
        for col in range(M):
            i = k * M + col
            if i == j:
                continue
            total += powers.phi_sq[i] * r ** (-alpha) * abs(np.vdot(g, W[:, col])) ** 2
    return total
