"""
Deterministic random streams.

Every random draw in the package goes through a PCG64 generator seeded from
``SeedSequence(seed, spawn_key=(stream, *keys))``. The stream id separates
purposes (locations, field noise, partition restarts, ...) and the keys
separate replicates, restarts and samples, so any component can be re-run on
its own and produce the same numbers.
"""

from enum import IntEnum

import numpy as np


class Stream(IntEnum):
    LOCATIONS = 1
    FIELD = 2
    PARTITION = 3
    MULTISTART = 4
    WEIGHTS = 5
    SHUFFLE = 6
    CORPUS = 7
    SPLIT = 8


def seed_sequence(seed: int, stream: Stream, *keys: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(
        int(seed), spawn_key=(int(stream),) + tuple(int(k) for k in keys)
    )


def rng_for(seed: int, stream: Stream, *keys: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, stream, *keys)))


def derive_seed(seed: int, stream: Stream, *keys: int) -> int:
    """A child seed for handing a stream to another component"""
    return int(seed_sequence(seed, stream, *keys).generate_state(1, np.uint64)[0])
