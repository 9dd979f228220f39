"""Seed discipline: every random draw derives from an explicit key tuple.

A key is the master seed followed by any mix of ints and short strings
(experiment kind, trial index, substream name).  Strings are folded to
uint32 via CRC so the mapping is stable across runs and platforms.  No
module ever touches ambient RNG state.
"""

from __future__ import annotations

import zlib

import numpy as np


def _fold(key) -> int:
    if isinstance(key, (int, np.integer)):
        return int(key) & 0xFFFFFFFF
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    raise TypeError(f"seed keys must be ints or strings, got {type(key)!r}")


def seed_sequence(*keys) -> np.random.SeedSequence:
    if not keys:
        raise ValueError("at least one seed key is required")
    return np.random.SeedSequence([_fold(k) for k in keys])


def rng(*keys) -> np.random.Generator:
    """Generator keyed by (master seed, *subkeys); independent per key tuple."""
    return np.random.default_rng(seed_sequence(*keys))
