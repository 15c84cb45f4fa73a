"""Reproducible random streams.

Every sampler in the package draws from a :class:`RandomStream`, a thin
(seed, stream id) pair mapped deterministically onto numpy's PCG64 bit
generator.  Identical (seed, stream) values give byte-identical sample
sequences across runs and platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_SEED = 1729


@dataclass(frozen=True)
class RandomStream:
    """Identifier of a reproducible random number stream."""

    seed: int
    stream: int = 0

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if int(self.stream) < 0:
            raise ValueError("stream id must be nonnegative")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=int(self.seed), spawn_key=(int(self.stream),))
        return np.random.Generator(np.random.PCG64(seq))

    def substream(self, k: int) -> "RandomStream":
        """Derive the k-th child stream; children of distinct streams never collide."""
        if k < 0:
            raise ValueError("substream index must be nonnegative")
        return RandomStream(self.seed, (int(self.stream) + 1) * 65537 + int(k))


def as_stream(stream) -> RandomStream:
    """Coerce None (default seed), an int seed, or a RandomStream."""
    if stream is None:
        return RandomStream(DEFAULT_SEED)
    if isinstance(stream, RandomStream):
        return stream
    if isinstance(stream, (int, np.integer)):
        return RandomStream(int(stream))
    raise TypeError(f"cannot interpret {stream!r} as a RandomStream")
