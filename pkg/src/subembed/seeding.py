"""Counter-based seed derivation.

All randomness in the package flows from a single 64-bit seed. Derived
streams (matrix rows, trials, families) get their own seeds through a
splitmix64 mix of the parent seed and a counter, so that stream i is
reproducible without generating streams 0..i-1 and independent of how
many streams exist.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def normalize_seed(seed: int) -> int:
    """Map any Python int (possibly negative) onto the 64-bit seed space."""
    return int(seed) & _MASK64


def derive_seed(seed: int, *path: int) -> int:
    """Derive a child seed from ``seed`` and a counter path.

    Distinct paths give statistically independent child seeds; the empty
    path returns the normalized seed itself. Used for matrix rows
    (``derive_seed(seed, i)``), trial streams, and family construction.
    """
    out = normalize_seed(seed)
    for index in path:
        out = _splitmix64(_splitmix64(out) ^ _splitmix64(normalize_seed(index)))
    return out


def rng_from(seed: int, *path: int) -> np.random.Generator:
    """A fresh PCG64 generator seeded by ``derive_seed(seed, *path)``."""
    return np.random.default_rng(derive_seed(seed, *path))
