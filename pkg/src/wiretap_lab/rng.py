"""Seeded random streams.

Every stream is a Philox-4x64 counter-based generator keyed directly by
``seed + 2**64 * unit``, so the stream for a unit (a trial, a realization, a
codebook) depends only on the master seed and the unit index.
"""

import numpy as np

SEED_MASK = 2**64 - 1


def rng_for(seed, unit=0):
    seed = int(seed)
    if not 0 <= seed <= SEED_MASK:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.Philox(key=seed + (int(unit) << 64)))
