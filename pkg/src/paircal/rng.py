"""Seeded generator plumbing.

Every random stream in paircal is derived from a single 64-bit master seed.
Independent substreams (one per simulation block) come from
``numpy.random.SeedSequence`` spawn keys, so the draws for block ``b`` depend
only on ``(seed, b)`` and never on how blocks are distributed over workers.
"""
from __future__ import annotations

import numpy as np

from .errors import ParameterError

SEED_MAX = 2**64 - 1


def check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ParameterError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed <= SEED_MAX:
        raise ParameterError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def make_rng(seed: int, stream: int | None = None) -> np.random.Generator:
    """Return a PCG64 generator for ``seed``, optionally for substream ``stream``."""
    seed = check_seed(seed)
    if stream is None:
        ss = np.random.SeedSequence(seed)
    else:
        ss = np.random.SeedSequence(seed, spawn_key=(int(stream),))
    return np.random.Generator(np.random.PCG64(ss))
