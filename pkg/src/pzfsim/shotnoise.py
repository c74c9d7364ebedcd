"""Second joint moment of shot noise over a marked PPP with possibly dependent marks.

``bound_value`` evaluates

    prod_k (2 pi int f_k q_k lambda r dr) + 2 pi int f_1 f_2 q_0 lambda r dr

by quadrature; ``estimate_joint_moment`` estimates E[I_1 I_2] by simulation.
When the envelopes q are the exact mark moments of independent marks the two
agree (Campbell's second-order formula); for dependent marks whose pairwise
moments are bounded above (below) by the envelopes, the quadrature value is
an upper (lower) bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .seeding import SHOTNOISE, rng_for


class DivergentIntegral(ArithmeticError):
    pass


RadialFn = Callable[[np.ndarray], np.ndarray]


def _const(c: float) -> RadialFn:
    return lambda r: np.full(np.shape(r), float(c))


@dataclass
class ShotNoiseSpec:
    """Attenuations f1, f2; envelopes q0, q1, q2; radial intensity; mark sampler.

    ``mark_sampler(r, rng)`` receives the radii of the whole configuration and
    returns an (n, 2) array of marks, so marks may depend on each other.
    ``density`` must be a nonnegative function of r; ``density_max`` bounds it
    on [0, r_max] (used for thinning).
    """

    f1: RadialFn
    f2: RadialFn
    q0: RadialFn
    q1: RadialFn
    q2: RadialFn
    density: RadialFn
    density_max: float
    mark_sampler: Callable[[np.ndarray, np.random.Generator], np.ndarray]
    r_max: float
    r_min: float = 0.0
    direction: str = "equal"  # "upper", "lower" or "equal": how the envelopes relate to the marks
    tail_tol: float = 1e-6
    name: str = ""


@dataclass(frozen=True)
class BoundValue:
    value: float
    tail: float  # bound on the contribution of r > r_max that the quadrature ignores


@dataclass(frozen=True)
class MomentEstimate:
    mean: float
    standard_error: float
    n_trials: int


def _radial_integral(fn: RadialFn, a: float, b: float) -> float:
    if b <= a:
        return 0.0
    val, _ = integrate.quad(lambda r: float(fn(np.asarray(r))), a, b, epsrel=1e-10, epsabs=0.0, limit=400)
    return val


def bound_value(model: ShotNoiseSpec) -> BoundValue:
    """Quadrature evaluation of the joint-moment bound on [r_min, r_max].

    The tail beyond r_max is estimated by integrating over [r_max, 2 r_max]
    and extrapolating geometrically from [r_max/2, r_max]; a tail larger than
    ``tail_tol`` relative to the value means the integrals are not under
    control and raises DivergentIntegral.
    """
    lam = model.density

    def terms(a, b):
        m1 = 2 * math.pi * _radial_integral(lambda r: model.f1(r) * model.q1(r) * lam(r) * r, a, b)
        m2 = 2 * math.pi * _radial_integral(lambda r: model.f2(r) * model.q2(r) * lam(r) * r, a, b)
        m0 = 2 * math.pi * _radial_integral(lambda r: model.f1(r) * model.f2(r) * model.q0(r) * lam(r) * r, a, b)
        return m1, m2, m0

    m1, m2, m0 = terms(model.r_min, model.r_max)
    value = m1 * m2 + m0
    t1, t2, t0 = terms(model.r_max, 2 * model.r_max)
    s1, s2, s0 = terms(model.r_max / 2, model.r_max)

    def geometric_tail(next_shell, prev_shell):
        # shells of doubling width; ratio < 1 means summable
        if next_shell == 0:
            return 0.0
        if prev_shell == 0:
            return math.inf
        ratio = next_shell / prev_shell
        return math.inf if ratio >= 1 else next_shell / (1 - ratio)

    e1, e2, e0 = (geometric_tail(abs(t1), abs(s1)), geometric_tail(abs(t2), abs(s2)),
                  geometric_tail(abs(t0), abs(s0)))
    tail = (abs(m1) + e1) * (abs(m2) + e2) - abs(m1 * m2) + e0
    scale = max(abs(value), 1e-300)
    if not math.isfinite(tail) or (value != 0 and tail > model.tail_tol * scale) or (value == 0 and tail > 0):
        raise DivergentIntegral(f"tail beyond r_max={model.r_max} is {tail:.3g} for value {value:.6g}")
    return BoundValue(value, tail)


def theorem_bound(model: ShotNoiseSpec) -> float:
    return bound_value(model).value


def sample_radii(model: ShotNoiseSpec, rng: np.random.Generator) -> np.ndarray:
    """Radii of a PPP with radial intensity density(r) on the annulus [r_min, r_max]."""
    area = math.pi * (model.r_max**2 - model.r_min**2)
    n = rng.poisson(model.density_max * area)
    r = np.sqrt(rng.uniform(model.r_min**2, model.r_max**2, size=n))
    keep = rng.uniform(0.0, model.density_max, size=n) < model.density(r)
    return r[keep]


def simulate_shot_noise(model: ShotNoiseSpec, rng: np.random.Generator) -> tuple[float, float]:
    """One realization of (I1, I2)."""
    r = sample_radii(model, rng)
    if r.size == 0:
        return 0.0, 0.0
    marks = np.asarray(model.mark_sampler(r, rng), dtype=float).reshape(r.size, 2)
    return float(np.dot(model.f1(r), marks[:, 0])), float(np.dot(model.f2(r), marks[:, 1]))


def simulate_many(model: ShotNoiseSpec, n_trials: int, master_seed: int, stream: int = 0) -> np.ndarray:
    """(n_trials, 2) array; trial t uses its own seed so any subset is reproducible."""
    out = np.empty((n_trials, 2))
    for t in range(n_trials):
        out[t] = simulate_shot_noise(model, rng_for(master_seed, SHOTNOISE, stream, t))
    return out


def estimate_joint_moment(model: ShotNoiseSpec, n_trials: int, master_seed: int, stream: int = 0) -> MomentEstimate:
    if n_trials < 100:
        raise ValueError("need at least 100 trials")
    s = simulate_many(model, n_trials, master_seed, stream)
    prod = s[:, 0] * s[:, 1]
    mean = math.fsum(prod) / n_trials
    sd = math.sqrt(math.fsum((prod - mean) ** 2) / (n_trials - 1))
    return MomentEstimate(mean, sd / math.sqrt(n_trials), n_trials)


# ---------------------------------------------------------------------------
# fixtures


def independent_exponential_fixture(lam: float = 1.0, r_max: float = 20.0) -> ShotNoiseSpec:
    """f = e^-r, i.i.d. unit-mean exponential marks (same mark in both sums).

    With p1 = p2 = p: E[p1 p2] for i = j is E[p^2] = 2, so q0 = 2, q1 = q2 = 1
    are exact and the bound is an equality.
    """

    def marks(r, rng):
        p = rng.exponential(1.0, size=r.size)
        return np.column_stack([p, p])

    f = lambda r: np.exp(-np.asarray(r))
    return ShotNoiseSpec(f, f, _const(2.0), _const(1.0), _const(1.0), _const(lam), lam, marks, r_max,
                         direction="equal", name="independent")


def shared_factor_fixture(lam: float = 1.0, r_max: float = 20.0, z_var: float = 0.5,
                          direction: str = "upper") -> ShotNoiseSpec:
    """Marks p_i = Z xi_i with one Gamma factor Z (mean 1, variance v) shared by all
    points and xi_i i.i.d. unit exponential.

    E[p_i p_j] = E[Z^2] = 1 + v (i != j) and E[p_i^2] = 2 (1 + v). Envelopes
    q1 = q2 = sqrt(1 + v), q0 = 2 (1 + v) are exact, so they serve as upper
    and lower envelopes at once. ``direction="upper"`` inflates them by 10 %,
    ``"lower"`` deflates them by 10 %.
    """
    scale = {"upper": 1.1, "lower": 0.9, "equal": 1.0}[direction]
    shape = 1.0 / z_var

    def marks(r, rng):
        z = rng.gamma(shape, z_var)
        p = z * rng.exponential(1.0, size=r.size)
        return np.column_stack([p, p])

    f = lambda r: np.exp(-np.asarray(r))
    q12 = math.sqrt(1 + z_var) * math.sqrt(scale)
    return ShotNoiseSpec(f, f, _const(2 * (1 + z_var) * scale), _const(q12), _const(q12), _const(lam), lam,
                         marks, r_max, direction=direction, name=f"shared_factor_{direction}")


def zero_mark_fixture(lam: float = 1.0, r_max: float = 20.0) -> ShotNoiseSpec:
    f = lambda r: np.exp(-np.asarray(r))
    return ShotNoiseSpec(f, f, _const(0.0), _const(0.0), _const(0.0), _const(lam), lam,
                         lambda r, rng: np.zeros((r.size, 2)), r_max, direction="equal", name="zero_marks")


def interference_fixture(bs_density: float, mean_power: float, peak: float, alpha: float, D: float,
                         r_max: float, tail_tol: float = 1e-2) -> ShotNoiseSpec:
    """Interference-like shot noise: f = r^-alpha 1{r > D}, q1 = q2 = Pbar, q0 = 2 P^2.

    Marks are |zeta|^2 scaled by a per-point power ~ U(0, 2 Pbar) clipped to
    [0, P] (independent), so the envelopes bound the true moments from above.
    The power-law tail decays slowly, hence the looser default ``tail_tol``.
    """

    def marks(r, rng):
        pw = np.minimum(rng.uniform(0.0, 2 * mean_power, size=r.size), peak)
        z = rng.exponential(1.0, size=r.size)
        p = pw * z
        return np.column_stack([p, p])

    f = lambda r: np.where(np.asarray(r) > D, np.asarray(r, dtype=float) ** (-alpha), 0.0)
    return ShotNoiseSpec(f, f, _const(2 * peak**2), _const(mean_power), _const(mean_power), _const(bs_density),
                         bs_density, marks, r_max, r_min=D, direction="upper", tail_tol=tail_tol,
                         name="interference")
