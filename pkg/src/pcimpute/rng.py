"""Counter-based seeding.

Every random stream in the package is addressed by a tuple of unsigned 64-bit
words ``(seed, a, b, ...)``.  The words are folded into one key with the
SplitMix64 finalizer::

    h = 0x9E3779B97F4A7C15
    for w in words:
        h = finalize((h ^ w) + 0x9E3779B97F4A7C15)

and the key drives a Philox4x64 generator, so replication ``i`` of grid
point ``g`` under master seed ``s`` is reproducible in isolation from
``(s, g, i)`` alone, whatever order or worker it runs on.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _finalize(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix_seed(*words: int) -> int:
    """Fold integer words into a single 64-bit key (SplitMix64 chain)."""
    h = _GOLDEN
    for w in words:
        if w < 0:
            raise ValueError("seed words must be non-negative")
        h = _finalize((h ^ (w & MASK64)) + _GOLDEN)
    return h


def stream(*words: int) -> np.random.Generator:
    """Return the generator addressed by ``words``."""
    return np.random.Generator(np.random.Philox(key=mix_seed(*words)))
