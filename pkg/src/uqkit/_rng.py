"""Seeded random streams.

All randomness goes through Philox, a counter-based generator, keyed by an
explicit seed plus an integer path. Stream ``(seed, i)`` is the same whether
member ``i`` is drawn alone, in a batch, or on another thread.
"""

import numpy as np


def stream(seed, *key):
    """Return an independent generator for ``(seed, *key)``."""
    if seed is None:
        raise ValueError("an explicit integer seed is required")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def complex_increments(rng, shape, dt):
    """Complex Wiener increments with independent parts, ``E|dW|^2 = dt``."""
    z = rng.standard_normal(shape + (2,) if isinstance(shape, tuple) else (shape, 2))
    return np.sqrt(dt / 2.0) * (z[..., 0] + 1j * z[..., 1])


def derive_seed(seed, *key):
    """Integer seed for a named sub-experiment, reproducible from ``(seed, *key)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])
