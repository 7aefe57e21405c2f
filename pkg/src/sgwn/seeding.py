"""Named sub-seeds derived from a single run seed."""

import zlib

import numpy as np


def sub_seed(seed: int, name: str) -> int:
    """Derive a stable 63-bit integer seed for the stream ``name``."""
    ss = np.random.SeedSequence([int(seed), zlib.crc32(name.encode("utf-8"))])
    return int(ss.generate_state(1, dtype=np.uint64)[0]) & ((1 << 63) - 1)


def sub_rng(seed: int, name: str) -> np.random.Generator:
    """Independent generator for one named randomness stream (dataset, init, shuffle, noise...)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), zlib.crc32(name.encode("utf-8"))]))
