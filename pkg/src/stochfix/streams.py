"""Counter-based random streams.

Every random quantity in the package is drawn from a stream addressed by
``(master_seed, *path)``.  The path is hashed through
:class:`numpy.random.SeedSequence` into a Philox key, so a stream depends only
on its address and never on the order in which streams are created.  This is
what makes serial and threaded runs bit-identical: work is split into blocks
whose addresses are fixed, and threads only decide *who* computes a block.

Path conventions used by the package (all integers):

* solver slots: ``(TAG_ITERATE, generation, r, block)``; the one-shot resample
  of non-finite slots appends ``1``.
* solver distances: ``(TAG_DISTANCE, generation, r)``.
* process runs: ``(TAG_PROCESS, run)``.
"""
from __future__ import annotations

import numpy as np

TAG_ITERATE = 1
TAG_DISTANCE = 2
TAG_MOMENTS = 3
TAG_AUDIT = 4
TAG_PROCESS = 5
TAG_LATTICE = 6
TAG_INIT = 7

BLOCK = 8192


def stream(seed: int, *path: int) -> np.random.Generator:
    """Return the generator addressed by ``(seed, *path)``."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    key = ss.generate_state(2, dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def child_seed(seed: int, *path: int) -> int:
    """A 63-bit integer seed derived from an address (for non-numpy consumers)."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def blocks(n: int, size: int = BLOCK):
    """Yield ``(index, start, stop)`` for fixed-size blocks covering ``range(n)``."""
    for i, start in enumerate(range(0, n, size)):
        yield i, start, min(start + size, n)
