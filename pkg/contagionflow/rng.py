from __future__ import annotations

import numpy as np

RngSeed = int

_SEED_MASK = (1 << 64) - 1


def make_rng(seed: RngSeed, *key: int) -> np.random.Generator:
    """Return a PCG64 generator for ``seed``, optionally on a derived stream.

    ``make_rng(s, 3, 7)`` is the stream with spawn key ``(3, 7)`` under root
    ``s``; it does not depend on how many other streams were drawn before it.
    """
    return np.random.Generator(np.random.PCG64(_sequence(seed, key)))


def derive_seed(seed: RngSeed, *key: int) -> RngSeed:
    """Derive a child 64-bit seed from a root seed and a spawn key."""
    state = _sequence(seed, key).generate_state(2, dtype=np.uint32)
    return (int(state[0]) << 32 | int(state[1])) & _SEED_MASK


def _sequence(seed: RngSeed, key: tuple[int, ...]) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(seed) & _SEED_MASK, spawn_key=tuple(key))
