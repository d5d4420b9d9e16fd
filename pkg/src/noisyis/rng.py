"""Counter-based random streams.

Every draw in the library is a pure function of (seed, stream, block):
each fixed-size block of a batch gets its own Philox generator keyed by
those three integers. Workers can therefore produce any block
independently and the concatenated output never depends on how the
blocks were scheduled. Streams keep x-draws, noise draws, and resampling
draws decoupled, so e.g. noisy and clean runs on one seed share the same
x sequence.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
from numpy.random import Generator, Philox

BLOCK = 8192

STREAM_X = 0
STREAM_NOISE = 1
STREAM_RESAMPLE = 2

_MASK64 = (1 << 64) - 1
_MAX_BLOCKS = 1 << 56


def block_generator(seed: int, stream: int, block: int) -> Generator:
    """Philox generator for one (seed, stream, block) cell."""
    if not 0 <= block < _MAX_BLOCKS:
        raise ValueError(f"block index out of range: {block}")
    key = np.array(
        [seed & _MASK64, ((stream & 0xFF) << 56) | block],
        dtype=np.uint64,
    )
    return Generator(Philox(key=key))


def sample_blocks(
    n: int,
    seed: int,
    stream: int,
    fill: Callable[[Generator, int], np.ndarray],
) -> np.ndarray:
    """Assemble n draws block by block.

    `fill(gen, m)` must return exactly m float64 draws using `gen` alone;
    the result is then independent of any other block.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    out = np.empty(n, dtype=np.float64)
    for block in range(0, (n + BLOCK - 1) // BLOCK):
        lo = block * BLOCK
        hi = min(n, lo + BLOCK)
        out[lo:hi] = fill(block_generator(seed, stream, block), hi - lo)
    return out
