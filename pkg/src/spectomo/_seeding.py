"""Deterministic seed derivation.

Every random draw in the package comes from a numpy ``PCG64`` generator whose
seed is derived from a master seed and a tuple of integer keys with the
splitmix64 finaliser.  Substreams therefore do not depend on the order in
which they are consumed.
"""

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def derive_seed(seed: int, *keys: int) -> int:
    """Mix integer ``keys`` into a 64-bit ``seed``."""
    state = splitmix64(int(seed) & _MASK)
    for key in keys:
        state = splitmix64(state ^ splitmix64(int(key) & _MASK))
    return state


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(seed, *keys)))
