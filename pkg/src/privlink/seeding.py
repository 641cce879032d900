"""Deterministic substream derivation for seeded randomness.

Every random draw in the package goes through a generator obtained from
``substream(seed, *tags)``.  Tags (strings or integers) identify the stage
and trial, so independent stages never share a stream and results do not
depend on evaluation order.
"""

import zlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _tag_to_int(tag) -> int:
    if isinstance(tag, str):
        return zlib.crc32(tag.encode("utf-8"))
    return int(tag) & _MASK64


def substream(seed: int, *tags) -> np.random.Generator:
    """Generator for the named substream of a master seed."""
    entropy = [int(seed) & _MASK64] + [_tag_to_int(t) for t in tags]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def subseed(seed: int, *tags) -> int:
    """Derived integer seed for handing to APIs that take a seed themselves."""
    entropy = [int(seed) & _MASK64] + [_tag_to_int(t) for t in tags]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])
