"""Seeded, splittable random streams.

Every stream wraps a NumPy ``Generator`` driven by the counter-based
Philox-4x64 bit generator. The generator is keyed by
``SeedSequence(seed, spawn_key=(stream, *path))`` so distinct ``(stream,
path)`` pairs give statistically independent sequences that can be consumed
concurrently, and the same triple always reproduces the same draws.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ALGORITHM = "Philox4x64-10 (numpy.random.Philox) keyed by SeedSequence(seed, spawn_key=(stream, *path))"

# conventional stream ids used by the experiment runner
GRID_STREAM = 0
EVAL_STREAM = 1
FUNCTION_STREAM = 2
DRAW_STREAM = 3


@dataclass
class RngStream:
    """An exclusively-owned random stream.

    Parameters
    ----------
    seed : int
        64-bit master seed.
    stream : int
        Stream id; different ids never share draws.
    path : tuple of int
        Optional sub-stream keys, see :meth:`child`.
    """

    seed: int
    stream: int = 0
    path: tuple[int, ...] = ()
    generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.seed < 0 or self.seed >= 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream), *map(int, self.path)))
        self.generator = np.random.Generator(np.random.Philox(ss))

    def child(self, *keys: int) -> "RngStream":
        """Independent sub-stream, e.g. one per (method, trial)."""
        return RngStream(self.seed, self.stream, self.path + tuple(int(k) for k in keys))

    def uniform(self, low, high, size):
        return self.generator.uniform(low, high, size)

    def random(self, size=None):
        return self.generator.random(size)

    def integers(self, low, high=None, size=None):
        return self.generator.integers(low, high, size)

    def normal(self, size=None):
        return self.generator.standard_normal(size)


def as_stream(rng, default_stream: int = 0) -> RngStream:
    """Accept an :class:`RngStream` or a bare integer seed."""
    if isinstance(rng, RngStream):
        return rng
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng), default_stream)
    raise TypeError(f"expected RngStream or int seed, got {type(rng).__name__}")
