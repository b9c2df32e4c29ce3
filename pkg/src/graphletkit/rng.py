"""Seeded random number streams.

All randomized operations take an explicit integer seed and build a
``numpy.random.Generator`` backed by PCG64, which has a stable, portable
stream. Independent substreams are derived by hashing ``(seed, label)``
with SHA-256, so the dataset generator, augmentation, weight init, batch
shuffling, and benchmark runs never share draws. The derived integer
seeds are plain 63-bit ints and are recorded in experiment configs so a
run can be replayed stream by stream.
"""

from __future__ import annotations

import hashlib

import numpy as np


def substream_seed(seed: int, label: str) -> int:
    """Derive the integer seed of the named substream of ``seed``."""
    digest = hashlib.sha256(f"{seed}:{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") >> 1


def generator(seed: int, label: str | None = None) -> np.random.Generator:
    """PCG64 generator for ``seed``, optionally on the ``label`` substream."""
    if label is not None:
        seed = substream_seed(seed, label)
    return np.random.Generator(np.random.PCG64(seed))
