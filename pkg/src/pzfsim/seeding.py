"""Seed derivation so that every random draw is addressed by ids, not by order.

A campaign is reproducible from ``(master_seed, ids)`` alone, which is what
makes results independent of how trials are spread over worker processes.
"""

import numpy as np

# spawn-key namespaces
GEOMETRY = 0
FADING = 1
POWER_SAMPLES = 2
SHOTNOISE = 3


def rng_for(master_seed: int, *key: int) -> np.random.Generator:
    """Independent generator for the stream addressed by ``key``."""
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def philox_key(master_seed: int, *key: int) -> np.ndarray:
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in key))
    return ss.generate_state(2, np.uint64)
