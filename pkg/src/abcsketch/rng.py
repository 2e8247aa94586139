"""Reproducible randomness.

Every random quantity in the package is drawn from a counter-based Philox
generator keyed by a ``(seed, stream)`` pair of 64-bit integers.  Identical
pairs give identical sequences; distinct streams are independent for all
practical purposes.  Sub-streams are derived with :meth:`Rng.child`, which
mixes labels into the stream id, so a protocol run can hand the same public
coins to several players without sharing a mutable generator.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


@dataclass(frozen=True)
class Rng:
    """A ``(seed, stream)`` handle that produces numpy generators on demand."""

    seed: int
    stream: int = 0

    def __post_init__(self):
        if not (0 <= self.seed <= MASK64 and 0 <= self.stream <= MASK64):
            raise ValueError("seed and stream must be unsigned 64-bit integers")

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=[self.seed, self.stream]))

    def child(self, *labels: int) -> "Rng":
        s = self.stream
        for label in labels:
            s = _splitmix64(s ^ _splitmix64(int(label) & MASK64))
        return Rng(self.seed, s)


def as_rng(rng=None) -> Rng:
    """Coerce ``rng`` (Rng, int seed, numpy Generator or None) to an :class:`Rng`."""
    if isinstance(rng, Rng):
        return rng
    if rng is None:
        return Rng(int(np.random.default_rng().integers(0, 2**63)))
    if isinstance(rng, np.random.Generator):
        return Rng(int(rng.integers(0, 2**63)))
    if isinstance(rng, (int, np.integer)):
        return Rng(int(rng) & MASK64)
    raise TypeError(f"cannot build an Rng from {type(rng).__name__}")


def as_generator(rng=None) -> np.random.Generator:
    """Coerce ``rng`` to a numpy Generator; Generators pass through unchanged."""
    if isinstance(rng, np.random.Generator):
        return rng
    return as_rng(rng).generator()
