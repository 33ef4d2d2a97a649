"""Deterministic random-stream derivation.

Every stochastic component of the package draws from a stream derived from
a user-supplied 64-bit seed plus a tuple of small integer keys (replication
index, split index, purpose code, ...). Streams derived from distinct keys
are statistically independent, so replications can run in any order, or in
parallel, without changing results.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInput


def _seed_sequence(seed: int, key: tuple[int, ...]) -> np.random.SeedSequence:
    if not isinstance(seed, (int, np.integer)) or seed < 0:
        raise InvalidInput(f"seed must be a non-negative integer, got {seed!r}")
    return np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))


def spawn_rng(seed: int, *key: int) -> np.random.Generator:
    """Return a Generator for the stream identified by (seed, *key)."""
    return np.random.default_rng(_seed_sequence(seed, key))


def spawn_seed(seed: int, *key: int) -> int:
    """Derive a child 64-bit seed; handy when an API takes a seed, not a Generator."""
    return int(_seed_sequence(seed, key).generate_state(1, np.uint64)[0])
