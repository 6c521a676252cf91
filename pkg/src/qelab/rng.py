"""Seeded, splittable random streams shared by the Monte Carlo routines."""

import numpy as np

RNG_NAME = "numpy.random.Philox(4x64) via SeedSequence.spawn"


def shard_generators(seed: int, n_shards: int) -> list[np.random.Generator]:
    """Independent Philox streams, one per shard, derived from a single seed."""
    children = np.random.SeedSequence(int(seed)).spawn(int(n_shards))
    return [np.random.Generator(np.random.Philox(c)) for c in children]


def generator(seed: int) -> np.random.Generator:
    return shard_generators(seed, 1)[0]
