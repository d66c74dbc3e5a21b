import numpy as np


def seed_sequence(seed) -> np.random.SeedSequence:
    """A fresh SeedSequence for ``seed``; spawning from it never mutates the caller's object."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=seed.spawn_key)
    return np.random.SeedSequence(seed)
