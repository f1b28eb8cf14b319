"""Seed derivation.

All randomness in the package goes through numpy's PCG64 generator.
Sub-seeds are derived from a master seed and a component name so that
independent parts of a recipe never share a stream.
"""
import hashlib

import numpy as np


def derive_seed(master_seed, *names):
    """Return a 63-bit seed from ``master_seed`` and a path of names."""
    h = hashlib.sha256(str(int(master_seed)).encode())
    for name in names:
        h.update(b"/")
        h.update(str(name).encode())
    return int.from_bytes(h.digest()[:8], "little") >> 1


def rng_for(master_seed, *names):
    return np.random.Generator(np.random.PCG64(derive_seed(master_seed, *names)))


def check_random_state(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        seed = 0
    return np.random.Generator(np.random.PCG64(int(seed)))
