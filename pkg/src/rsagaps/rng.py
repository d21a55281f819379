"""Reproducible random streams.

Every stream is a numpy ``Generator`` over the counter-based Philox-4x64-10
bit generator.  A stream is identified by the pair
``(master_seed, substream_index)``; the key is derived with numpy's
``SeedSequence(master_seed, spawn_key=(substream_index,))`` so distinct
indices give independent streams and the same pair gives the same sample
sequence on every platform.
"""
from __future__ import annotations

import numpy as np

ALGORITHM = "philox4x64-10/seedsequence-spawn-key"

_SEED_MASK = (1 << 64) - 1


class RngStream:
    """A single-owner deterministic random stream."""

    algorithm = ALGORITHM

    __slots__ = ("master_seed", "substream_index", "_gen")

    def __init__(self, master_seed: int, substream_index: int = 0):
        if master_seed < 0 or master_seed > _SEED_MASK:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if substream_index < 0:
            raise ValueError("substream_index must be non-negative")
        self.master_seed = int(master_seed)
        self.substream_index = int(substream_index)
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.substream_index,))
        self._gen = np.random.Generator(np.random.Philox(seq))

    def __repr__(self) -> str:
        return f"RngStream(master_seed={self.master_seed}, substream_index={self.substream_index})"

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def random(self) -> float:
        """One uniform draw on [0, 1)."""
        return self._gen.random()

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self._gen.random()

    def randoms(self, n: int) -> np.ndarray:
        return self._gen.random(n)


def trial_stream(master_seed: int, trial_index: int) -> RngStream:
    """Substream owned by one Monte Carlo trial."""
    return RngStream(master_seed, trial_index)
