"""Deterministic RNG plumbing.

One generator algorithm is used everywhere: numpy's PCG64 behind
np.random.Generator.  Experiment harnesses derive the stream for trial i
from a master seed as SeedSequence(master_seed, spawn_key=(i,)), so any
single trial can be replayed without running the ones before it.
"""

from __future__ import annotations

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def trial_rng(master_seed: int, index: int) -> np.random.Generator:
    seq = np.random.SeedSequence(master_seed, spawn_key=(index,))
    return np.random.Generator(np.random.PCG64(seq))


def draw_seed(rng: np.random.Generator) -> int:
    """A fresh 64-bit seed from an existing stream (for seed-form headers)."""
    return int(rng.integers(0, 0xFFFFFFFFFFFFFFFF, dtype=np.uint64, endpoint=True))
