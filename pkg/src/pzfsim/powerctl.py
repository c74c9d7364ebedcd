"""Two-level water-filling power allocation and the equal-power baseline.

A global water level fixes the network mean BS power; a per-BS level caps
each BS at its peak power. Expectations over in-cell distances are taken on
a frozen sample set so that the mean-power curve is a deterministic,
monotone function of the global level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .asymptotics import AsymptoticParams, interference_constant
from .config import PlacementMode
from .geometry import sample_radii

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class InfeasibleTarget(ValueError):
    pass


def g_factor(p: AsymptoticParams, L: int, mean_power: float) -> float:
    """Effective SNR gain per unit power at unit distance:
    L^(alpha/2) (1 - s^2 pi lambda_b M) / (s^(2-alpha) 2 pi Pbar lambda_b/(alpha-2) + mu)."""
    if mean_power <= 0:
        raise ValueError("mean power must be positive")
    return L ** (p.alpha / 2) * (1 - p.load()) / (interference_constant(p, mean_power=mean_power) + p.mu)


def waterfill_candidate(level: float, gains) -> np.ndarray:
    """max(0, level - 1/gain), elementwise; broadcasts over leading axes."""
    gains = np.asarray(gains, dtype=float)
    return np.maximum(0.0, level - 1.0 / gains)


def mean_power_curve(level: float, gains: np.ndarray, peak: float) -> float:
    """E[min(P, sum_m candidate)] over the rows of ``gains`` (shape (n, M))."""
    return float(np.minimum(peak, waterfill_candidate(level, gains).sum(axis=-1)).mean())


def _bisect(f, lo: float, hi: float, target: float, tol: float, max_iter: int = 400) -> float:
    # f nondecreasing; returns x with |f(x) - target| <= tol or the bracket midpoint at float resolution
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        v = f(mid)
        if abs(v - target) <= tol:
            return mid
        if v < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_level(target_mean: float, gains: np.ndarray, peak: float, tol: float = 1e-9) -> float:
    """Global water level whose clipped mean power equals ``target_mean``."""
    if not 0 < target_mean <= peak:
        raise InfeasibleTarget(f"target mean power {target_mean} not in (0, {peak}]")
    gains = np.atleast_2d(gains)
    inv = 1.0 / gains
    lo = float(inv.min())  # below this every candidate is zero
    hi = float(inv.max()) + peak
    # hi saturates every sample at P
    if target_mean >= peak:
        # the curve reaches P only once each sample's sum hits P: the smallest
        # such level is the largest per-sample peak level
        return float(inner_levels(gains, peak).max())
    return _bisect(lambda x: mean_power_curve(x, gains, peak), lo, hi, target_mean, tol * peak)


def inner_levels(gains: np.ndarray, peak: float) -> np.ndarray:
    """Per-row water level at which the row's candidate powers sum to ``peak``.

    Classic sort-and-scan water-filling: exact up to rounding.
    """
    gains = np.atleast_2d(np.asarray(gains, dtype=float))
    inv = np.sort(1.0 / gains, axis=-1)
    n_active = np.arange(1, inv.shape[-1] + 1)
    levels = (peak + np.cumsum(inv, axis=-1)) / n_active
    # the right active count is the largest k whose level exceeds the k-th inverse gain
    ok = levels > inv
    k = inv.shape[-1] - 1 - np.argmax(ok[..., ::-1], axis=-1)
    return np.take_along_axis(levels, k[..., None], axis=-1)[..., 0]


def allocate(level: float, gains, peak: float) -> np.ndarray:
    """Powers for one BS (1-D gains) or many BSs (rows) given the global level.

    Rows whose candidate exceeds ``peak`` are re-filled at their own level so
    that they use exactly the peak power.
    """
    gains = np.asarray(gains, dtype=float)
    squeeze = gains.ndim == 1
    g2 = np.atleast_2d(gains)
    cand = waterfill_candidate(level, g2)
    over = cand.sum(axis=-1) > peak
    if np.any(over):
        gam = inner_levels(g2[over], peak)
        filled = waterfill_candidate(gam[:, None], g2[over])
        # remove rounding so the row sums to P exactly up to one ulp-scale step
        filled *= peak / filled.sum(axis=-1, keepdims=True)
        cand[over] = filled
    return cand[0] if squeeze else cand


def sum_rate(powers, gains) -> np.ndarray:
    return np.log2(1.0 + np.asarray(powers) * np.asarray(gains)).sum(axis=-1)


@dataclass(frozen=True)
class WaterfillSolution:
    mean_power: float
    level: float
    rate: float
    g: float


def solve_for_mean_power(p: AsymptoticParams, L: int, radii: np.ndarray, mean_power: float) -> WaterfillSolution:
    """Rate of the two-level policy at a given mean BS power (g recomputed)."""
    g = g_factor(p, L, mean_power)
    gains = g * radii ** (-p.alpha)
    lvl = solve_level(mean_power, gains, p.peak_power)
    powers = allocate(lvl, gains, p.peak_power)
    return WaterfillSolution(mean_power, lvl, float(sum_rate(powers, gains).mean()), g)


def optimize_mean_power(p: AsymptoticParams, L: int, radii: np.ndarray,
                        rel_tol: float = 1e-6) -> WaterfillSolution:
    """Golden-section search of the mean BS power in (0, P]."""
    P = p.peak_power
    cache: dict[float, WaterfillSolution] = {}

    def f(x: float) -> WaterfillSolution:
        if x not in cache:
            cache[x] = solve_for_mean_power(p, L, radii, x)
        return cache[x]

    a, b = P * 1e-9, P
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    while (b - a) > rel_tol * P:
        if f(c).rate >= f(d).rate:
            b, d = d, c
            c = b - _GOLDEN * (b - a)
        else:
            a, c = c, d
            d = a + _GOLDEN * (b - a)
    best = max((f(x) for x in (a, b, c, d, P)), key=lambda s: s.rate)
    return best


def frozen_radii(placement: PlacementMode, R: float, M: int, n: int, rng: np.random.Generator) -> np.ndarray:
    return sample_radii(placement, R, (n, M), rng)


def equal_power(M: int, peak: float) -> np.ndarray:
    return np.full(M, peak / M)
