"""Rayleigh fading and path-loss channel vectors.

Fading vectors are never stored for the whole network. The vector between
mobile ``j`` and BS ``k`` is a pure function of ``(master_seed, trial, k, j)``:
each BS owns a Philox stream and mobile ``j`` reads a fixed-size slot of it,
so a single pair and a whole block of mobiles give bit-identical values.
"""

from __future__ import annotations

import numpy as np

from .seeding import FADING, philox_key

_TWO_PI = 2.0 * np.pi
_INV_2_53 = 1.0 / 9007199254740992.0


def _slot(L: int) -> int:
    # raw 64-bit words per mobile, padded to whole Philox blocks (4 words)
    return 4 * -(-2 * L // 4)


def _raw_to_cn(raw: np.ndarray) -> np.ndarray:
    """Box-Muller on paired raw words -> CN(0, 1) entries."""
    u1 = ((raw[..., 0::2] >> np.uint64(11)).astype(np.float64) + 1.0) * _INV_2_53  # (0, 1]
    phase = (raw[..., 1::2] >> np.uint64(11)).astype(np.float64) * (_INV_2_53 * _TWO_PI)
    amp = np.sqrt(-np.log(u1))
    out = np.empty(u1.shape, dtype=complex)
    out.real = amp * np.cos(phase)
    out.imag = amp * np.sin(phase)
    return out


def _bitgen(master_seed: int, trial: int, bs_id: int) -> np.random.Philox:
    return np.random.Philox(key=philox_key(master_seed, FADING, trial, bs_id))


def fading_vector(mobile_id: int, bs_id: int, L: int, master_seed: int, trial: int = 0) -> np.ndarray:
    """i.i.d. CN(0,1) fading vector of length L for one (mobile, BS) pair."""
    if L < 1:
        raise ValueError("L must be >= 1")
    slot = _slot(L)
    bg = _bitgen(master_seed, trial, bs_id)
    bg.advance(mobile_id * slot // 4)
    return _raw_to_cn(bg.random_raw(2 * L))


def fading_block(bs_id: int, n_mobiles: int, L: int, master_seed: int, trial: int = 0) -> np.ndarray:
    """Fading vectors from BS ``bs_id`` to mobiles ``0..n_mobiles-1``, shape (n, L).

    Row ``j`` equals ``fading_vector(j, bs_id, L, master_seed, trial)`` exactly.
    """
    slot = _slot(L)
    raw = _bitgen(master_seed, trial, bs_id).random_raw(n_mobiles * slot).reshape(n_mobiles, slot)
    return _raw_to_cn(raw[:, : 2 * L])


def channel_vector(fading: np.ndarray, distance: float, alpha: float) -> np.ndarray:
    """h = g * r^(-alpha/2)."""
    if distance <= 0:
        raise ValueError("distance must be positive (singular path loss at r = 0)")
    if alpha <= 2:
        raise ValueError("path-loss exponent must exceed 2")
    return np.asarray(fading) * distance ** (-alpha / 2)
