"""Keyed random substreams.

Every stochastic step draws from a generator derived from the master seed
and a tuple of integer keys, so results never depend on evaluation order or
on how work is split across threads.
"""
import numpy as np

# Top-level stream tags.
MODEL = 0
DATA = 1
BOOTSTRAP = 2


def substream(seed, *keys):
    """Return an independent ``np.random.Generator`` for ``(seed, *keys)``."""
    if seed is None:
        raise ValueError("a master seed is required for reproducible streams")
    entropy = [int(seed)] + [int(k) for k in keys]
    if any(e < 0 for e in entropy):
        raise ValueError("seed and stream keys must be non-negative")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
