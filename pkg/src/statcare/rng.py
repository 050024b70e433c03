"""Seeded random-number streams.

All randomness in the package flows through Philox, a counter-based
generator. A stream is addressed by (seed, stream_index), so replicate r
of an experiment always uses ``stream(seed, r)`` regardless of whether the
replicates run serially or concurrently.
"""

from __future__ import annotations

import numpy as np


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Return the generator for substream ``index`` of ``seed``."""
    if seed < 0 or index < 0:
        raise ValueError("seed and stream index must be non-negative")
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def as_generator(seed: int | np.random.Generator) -> np.random.Generator:
    """Accept either a seed or an existing generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return stream(int(seed))
