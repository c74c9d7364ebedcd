"""Base-station and mobile placement on a wrapped square window."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ConfigError, PlacementMode


@dataclass(frozen=True)
class TorusWindow:
    """Square window of side ``side`` km with opposite edges identified."""

    side: float

    def __post_init__(self):
        if not self.side > 0:
            raise ConfigError("window side must be positive")

    def wrap(self, pts: np.ndarray) -> np.ndarray:
        return np.mod(pts, self.side)


def torus_delta(p: np.ndarray, q: np.ndarray, side: float) -> np.ndarray:
    """Shortest displacement q - p on the torus (componentwise, broadcasting)."""
    d = np.asarray(q, dtype=float) - np.asarray(p, dtype=float)
    return d - side * np.round(d / side)


def torus_distance(p, q, window: TorusWindow):
    """Wrap-around distance between points ``p`` and ``q``.

    Equal to the minimum over the nine translated images of ``q``. Broadcasts
    over leading dimensions; the last axis holds (x, y).
    """
    d = torus_delta(p, q, window.side)
    return np.hypot(d[..., 0], d[..., 1])


def pairwise_torus_distance(a: np.ndarray, b: np.ndarray, window: TorusWindow) -> np.ndarray:
    """Matrix of torus distances, shape (len(a), len(b))."""
    return torus_distance(a[:, None, :], b[None, :, :], window)


def sample_hppp(density: float, window: TorusWindow, rng: np.random.Generator) -> np.ndarray:
    """Homogeneous PPP on the window; returns an (n, 2) array."""
    if density < 0:
        raise ValueError("density must be >= 0")
    n = rng.poisson(density * window.side**2)
    return rng.uniform(0.0, window.side, size=(n, 2))


def sample_radii(mode: PlacementMode, R: float, size, rng: np.random.Generator) -> np.ndarray:
    """Serving distances drawn from the in-cell placement law."""
    mode = PlacementMode(mode)
    if mode is PlacementMode.CELL_EDGE:
        return np.full(size, float(R))
    # area-uniform on the disk: P(r <= x) = x^2 / R^2
    return R * np.sqrt(rng.uniform(0.0, 1.0, size=size))


def place_mobiles(bs, mode: PlacementMode, R: float, M: int, rng: np.random.Generator,
                  window: TorusWindow | None = None) -> np.ndarray:
    """M mobile positions around ``bs`` (wrapped into ``window`` if given)."""
    if R <= 0 or M < 1:
        raise ValueError("need R > 0 and M >= 1")
    r = sample_radii(mode, R, M, rng)
    theta = rng.uniform(0.0, 2 * np.pi, size=M)
    pts = np.asarray(bs, dtype=float) + np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    return window.wrap(pts) if window is not None else pts


@dataclass(frozen=True, eq=False)
class NetworkRealization:
    """One drop of BSs and mobiles.

    Mobiles are numbered ``k * M + m`` for the m-th mobile of BS k, so
    ``serving[i] == i // M``.
    """

    window: TorusWindow
    bs_positions: np.ndarray  # (K, 2)
    mobile_positions: np.ndarray  # (K*M, 2)
    mobiles_per_bs: int
    nulling_radius: float
    dist: np.ndarray  # (K*M, K) torus distances mobile -> BS
    nulled_sets: tuple  # per BS, sorted mobile ids with distance < D

    @property
    def n_bs(self) -> int:
        return len(self.bs_positions)

    @property
    def n_mobiles(self) -> int:
        return len(self.mobile_positions)

    @property
    def serving(self) -> np.ndarray:
        return np.arange(self.n_mobiles) // self.mobiles_per_bs

    def served_set(self, k: int) -> np.ndarray:
        M = self.mobiles_per_bs
        return np.arange(k * M, (k + 1) * M)

    @property
    def served_sets(self) -> list[np.ndarray]:
        return [self.served_set(k) for k in range(self.n_bs)]

    def serving_distance(self) -> np.ndarray:
        return self.dist[np.arange(self.n_mobiles), self.serving]


def nulled_sets_from(dist: np.ndarray, D: float) -> tuple:
    inside = dist < D
    return tuple(np.flatnonzero(inside[:, k]) for k in range(dist.shape[1]))


def build_realization(bs_density: float, mobiles_per_bs: int, cell_radius: float,
                      placement: PlacementMode, window: TorusWindow, nulling_radius: float,
                      rng: np.random.Generator) -> NetworkRealization:
    """Sample BSs, attach M mobiles to each, and find the nulling sets."""
    if nulling_radius > window.side / 2:
        raise ConfigError(
            f"nulling radius {nulling_radius:.4g} exceeds half the window side {window.side / 2:.4g}"
        )
    bs = sample_hppp(bs_density, window, rng)
    M = mobiles_per_bs
    K = len(bs)
    r = sample_radii(placement, cell_radius, (K, M), rng)
    theta = rng.uniform(0.0, 2 * np.pi, size=(K, M))
    offs = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)
    mobiles = window.wrap(bs[:, None, :] + offs).reshape(K * M, 2)
    dist = pairwise_torus_distance(mobiles, bs, window) if K else np.zeros((0, 0))
    return NetworkRealization(
        window=window,
        bs_positions=bs,
        mobile_positions=mobiles,
        mobiles_per_bs=M,
        nulling_radius=float(nulling_radius),
        dist=dist,
        nulled_sets=nulled_sets_from(dist, nulling_radius),
    )


def with_nulling_radius(net: NetworkRealization, D: float) -> NetworkRealization:
    """Same drop, different nulling radius (used for L sweeps on one geometry)."""
    if D > net.window.side / 2:
        raise ConfigError("nulling radius exceeds half the window side")
    return NetworkRealization(
        window=net.window,
        bs_positions=net.bs_positions,
        mobile_positions=net.mobile_positions,
        mobiles_per_bs=net.mobiles_per_bs,
        nulling_radius=float(D),
        dist=net.dist,
        nulled_sets=nulled_sets_from(net.dist, D),
    )
