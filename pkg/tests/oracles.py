"""Independent reference computations used by the tests.

Each oracle is a brute-force or closed-form evaluation that shares no code
with the package.
"""

import itertools
import math

import numpy as np


def simplex_grid(M: int, total: float, steps: int) -> np.ndarray:
    """All points of {p >= 0, sum p <= total} on a lattice of spacing total/steps."""
    pts = [c for c in itertools.product(range(steps + 1), repeat=M - 1) if sum(c) <= steps]
    base = np.array(pts, dtype=float)
    # last coordinate free in [0, remaining]: evaluated on the same lattice
    rows = []
    for c in base:
        rest = steps - c.sum()
        last = np.arange(int(rest) + 1, dtype=float)
        rows.append(np.column_stack([np.repeat(c[None, :], last.size, axis=0), last]))
    return np.vstack(rows) * (total / steps)


def _objective(p, gains, price):
    return np.log(1 + p * gains).sum(axis=-1) - price * p.sum(axis=-1)


def grid_waterfill(gains, peak: float, price: float, steps: int = 400, refine: int = 3):
    """Maximize sum ln(1 + g p) - price * sum p over {p >= 0, sum p <= peak}.

    Coarse lattice search, then ``refine`` rounds of a local box search of
    shrinking width around the incumbent. Returns (best p, objective).
    """
    gains = np.asarray(gains, dtype=float)
    M = gains.size
    cand = simplex_grid(M, peak, steps)
    vals = _objective(cand, gains, price)
    best = cand[np.argmax(vals)]
    width = peak / steps
    for _ in range(refine):
        axes = [np.linspace(max(0.0, b - 2 * width), b + 2 * width, 41) for b in best]
        box = np.array(np.meshgrid(*axes, indexing="ij")).reshape(M, -1).T
        box = box[box.sum(axis=1) <= peak * (1 + 1e-15)]
        v = _objective(box, gains, price)
        best = box[np.argmax(v)]
        width /= 10
    return best, float(_objective(best, gains, price))


def grid_max_sum_rate(gains, peak: float, steps: int = 400, refine: int = 3):
    """Maximize sum log2(1 + g p) over the full-power face sum p = peak."""
    gains = np.asarray(gains, dtype=float)
    M = gains.size
    f = lambda q: np.log2(1 + np.column_stack([q, peak - q.sum(axis=1)]) * gains).sum(axis=1)
    head = simplex_grid(M - 1, peak, steps) if M > 1 else np.zeros((1, 0))
    if M == 1:
        return np.array([peak]), float(np.log2(1 + peak * gains[0]))
    vals = f(head)
    best = head[np.argmax(vals)]
    width = peak / steps
    for _ in range(refine):
        axes = [np.linspace(max(0.0, b - 2 * width), b + 2 * width, 81) for b in best]
        box = np.array(np.meshgrid(*axes, indexing="ij")).reshape(M - 1, -1).T
        box = box[box.sum(axis=1) <= peak]
        v = f(box)
        best = box[np.argmax(v)]
        width /= 20
    p = np.append(best, peak - best.sum())
    return p, float(np.log2(1 + p * gains).sum())


def normalized_prediction(lam, M, alpha, s, pbar, noise):
    """(1 - s^2 pi lam M) / (s^(2-alpha) 2 pi pbar lam/(alpha-2) + noise)."""
    return (1 - s * s * math.pi * lam * M) / (s ** (2 - alpha) * 2 * math.pi * pbar * lam / (alpha - 2) + noise)


def exponential_shot_noise_moment(lam, q0, q1, q2):
    """Campbell value for f = e^-r: int_0^inf e^-r r dr = 1, int_0^inf e^-2r r dr = 1/4."""
    return (2 * math.pi * lam * q1) * (2 * math.pi * lam * q2) + 2 * math.pi * lam * q0 / 4


def interference_moment_bound(lam, pbar, peak, alpha, D):
    """(2 pi lam Pbar D^(2-a)/(a-2))^2 + 4 pi P^2 lam D^(2-2a)/(2a-2)."""
    return ((2 * math.pi * lam * pbar * D ** (2 - alpha) / (alpha - 2)) ** 2
            + 4 * math.pi * peak**2 * lam * D ** (2 - 2 * alpha) / (2 * alpha - 2))
