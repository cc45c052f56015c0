"""Counter-indexed randomness and the deterministic Monte Carlo runner.

Every random draw in this package is a pure function of a 64-bit seed, a
small domain tag and a sample counter. Sample k of a run therefore sees the
same uniforms no matter how the run is split across workers, which makes
every Monte Carlo estimate bit-reproducible.

The generator is Philox (4x64). The sample space is tiled into blocks of
``BLOCK_SAMPLES`` rows; the block index is placed in the high words of the
Philox counter so blocks never overlap. Domain tags keep streams for
unrelated purposes disjoint even when a caller reuses one seed everywhere.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

BLOCK_SAMPLES = 4096
_MASK64 = (1 << 64) - 1

DOMAIN_DIST = 1
DOMAIN_MMSE_MC = 2
DOMAIN_CODEBOOK = 3
DOMAIN_SIM = 4


def _block_uniforms(seed: int, domain: int, block: int, width: int) -> np.ndarray:
    key = np.array([seed & _MASK64, domain & _MASK64], dtype=np.uint64)
    bitgen = np.random.Philox(key=key, counter=block << 128)
    return np.random.Generator(bitgen).random((BLOCK_SAMPLES, width))


def uniform_matrix(seed: int, domain: int, start: int, count: int, width: int) -> np.ndarray:
    """Uniforms for samples [start, start+count), shape (count, width).

    Row i depends only on (seed, domain, start + i, width), never on which
    other rows were requested.
    """
    if count < 0 or start < 0 or width < 1:
        raise ValueError("start/count must be nonnegative and width >= 1")
    out = np.empty((count, width))
    pos = 0
    while pos < count:
        block, offset = divmod(start + pos, BLOCK_SAMPLES)
        take = min(count - pos, BLOCK_SAMPLES - offset)
        out[pos:pos + take] = _block_uniforms(seed, domain, block, width)[offset:offset + take]
        pos += take
    return out


def run_blocked(
    total: int,
    block_fn: Callable[[int, int], np.ndarray],
    threads: int = 1,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Accumulate per-sample contributions over fixed-size blocks.

    ``block_fn(start, count)`` must return an array of shape (count, q) whose
    rows are pure functions of the sample index. Returns (sums, sumsqs,
    total) with the per-block partial sums combined in block order, so the
    result is bit-identical for any ``threads`` value.
    """
    if total < 1:
        raise ValueError("total samples must be >= 1")
    starts = list(range(0, total, BLOCK_SAMPLES))

    def reduce_one(start: int) -> tuple[np.ndarray, np.ndarray]:
        count = min(BLOCK_SAMPLES, total - start)
        contrib = np.atleast_2d(np.asarray(block_fn(start, count), dtype=float))
        if contrib.shape[0] != count:
            raise ValueError("block_fn returned a wrong number of rows")
        return contrib.sum(axis=0), (contrib * contrib).sum(axis=0)

    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(reduce_one, starts))
    else:
        partials = [reduce_one(s) for s in starts]

    sums = partials[0][0].copy()
    sumsqs = partials[0][1].copy()
    for s, ss in partials[1:]:
        sums += s
        sumsqs += ss
    return sums, sumsqs, total
