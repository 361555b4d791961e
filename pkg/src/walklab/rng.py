"""Counter-based random streams.

Every stochastic component draws from a Philox generator keyed by
(master seed, trial index, stream id).  Philox is counter-based, so the
stream for a given key is identical no matter which thread, process or
schedule asks for it — ensembles are reproducible under any execution
plan, and adding trials never perturbs existing ones.
"""

import numpy as np

MASK64 = (1 << 64) - 1

# Stream ids: one per independent consumer of randomness.
STREAM_WALK = 0
STREAM_MINTAIL = 1
STREAM_BETA = 2
STREAM_CHAIN = 3
STREAM_PAIR = 4

_KEY_PAD = 0x9E3779B97F4A7C15  # fixed fourth key word, distinguishes walklab streams


def philox_key(master_seed: int) -> np.ndarray:
    """128-bit Philox key from the master seed."""
    return np.array([master_seed & MASK64, _KEY_PAD], dtype=np.uint64)


def generator(master_seed: int, trial: int = 0, stream: int = 0) -> np.random.Generator:
    """Independent generator for one (seed, trial, stream) triple.

    The trial and stream ids select disjoint 2^128 blocks of the Philox
    counter space (the low two counter words advance during generation),
    so streams never overlap under any schedule.
    """
    counter = np.array([0, 0, trial & MASK64, stream & MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=philox_key(master_seed), counter=counter))
