"""Counter-based random stream derivation.

Every simulation is split into *units* (one protocol trial, one sampling
batch, one sweep point) and each unit owns an independent Philox stream.
The 128-bit Philox key packs the unit index into the high word::

    key(unit) = (unit << 64) | (master_seed & 2**64 - 1)

Distinct keys give statistically independent counter-based streams, so a
run is reproducible from ``(master_seed, unit layout)`` alone and units
can be executed in any order or on any number of workers.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def unit_key(master_seed: int, unit: int) -> int:
    """128-bit Philox key for a work unit."""
    if unit < 0:
        raise ValueError(f"unit index must be nonnegative, got {unit}")
    return ((unit & _MASK64) << 64) | (master_seed & _MASK64)


def unit_bit_generator(master_seed: int, unit: int) -> np.random.Philox:
    return np.random.Philox(key=unit_key(master_seed, unit))


def unit_stream(master_seed: int, unit: int) -> np.random.Generator:
    """Generator for one work unit, independent of all other units."""
    return np.random.Generator(unit_bit_generator(master_seed, unit))
