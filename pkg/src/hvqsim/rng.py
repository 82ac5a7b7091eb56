"""Seed handling.

Every stochastic operation takes an explicit seed. Child streams are derived
from a parent seed with :class:`numpy.random.SeedSequence` so that splitting
work into chunks (or across workers) never changes the numbers drawn.
"""
from __future__ import annotations

from typing import Union

import numpy as np

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator, None]

# Work is split into fixed-size chunks; the chunk size, not the worker count,
# fixes the seed stream of each trial.
CHUNK_TRIALS = 4096


def as_generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def child_seeds(seed: int | np.random.SeedSequence, n: int) -> list[np.random.SeedSequence]:
    """Return ``n`` independent child seed sequences of ``seed``."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return ss.spawn(n)


def child_seed(seed: int | np.random.SeedSequence, index: int) -> np.random.SeedSequence:
    """The ``index``-th child of ``seed`` without spawning its siblings."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return np.random.SeedSequence(ss.entropy, spawn_key=ss.spawn_key + (index,))


def chunk_sizes(trials: int, chunk: int = CHUNK_TRIALS) -> list[int]:
    full, rest = divmod(trials, chunk)
    return [chunk] * full + ([rest] if rest else [])


def derive(seed: int, *keys: int) -> np.random.SeedSequence:
    """Seed for the stream addressed by ``keys`` below ``seed``."""
    return np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in keys))
