"""Counter-based random streams (Philox4x32-10).

Every random number the simulator consumes is a pure function of
``(master_seed, trial, substream, point, block)``, so results do not depend
on how trials are split across workers. The counter words are laid out as

    c0 = block, c1 = point index, c2 = trial index, c3 = substream id

and the 64-bit master seed is the key. Each block yields two doubles in
(0, 1) built from 53 random bits each.
"""
from __future__ import annotations

import numpy as np

FIELD, FADING, FILTER = 0, 1, 2

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK = np.uint64(0xFFFFFFFF)
_SHIFT = np.uint64(32)
ROUNDS = 10


def split_seed(seed: int) -> tuple[int, int]:
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return seed & 0xFFFFFFFF, seed >> 32


def philox4x32(c0, c1, c2, c3, k0, k1, rounds: int = ROUNDS):
    """Vectorized Philox4x32 bijection. Inputs and outputs are uint32 values held in uint64 arrays."""
    c0, c1, c2, c3 = (np.asarray(c, dtype=np.uint64) & _MASK for c in (c0, c1, c2, c3))
    c0, c1, c2, c3 = np.broadcast_arrays(c0, c1, c2, c3)
    k0 = np.uint64(k0)
    k1 = np.uint64(k1)
    for i in range(rounds):
        if i:
            k0 = (k0 + _W0) & _MASK
            k1 = (k1 + _W1) & _MASK
        p0 = _M0 * c0
        p1 = _M1 * c2
        c0, c1, c2, c3 = (
            (p1 >> _SHIFT) ^ c1 ^ k0,
            p1 & _MASK,
            (p0 >> _SHIFT) ^ c3 ^ k1,
            p0 & _MASK,
        )
    return c0, c1, c2, c3


def _to_unit(hi, lo):
    bits = ((hi << _SHIFT) | lo) >> np.uint64(11)
    return (bits.astype(np.float64) + 0.5) * 2.0**-53


def uniform_block(seed: int, trial, substream: int, point, block):
    """Both doubles of one Philox block for arrays of trials/points/blocks."""
    k0, k1 = split_seed(seed)
    x0, x1, x2, x3 = philox4x32(block, point, trial, substream, k0, k1)
    return _to_unit(x0, x1), _to_unit(x2, x3)


def uniform(seed: int, trial, substream: int, point, index):
    """The ``index``-th double of the (trial, substream, point) stream."""
    index = np.asarray(index, dtype=np.uint64)
    a, b = uniform_block(seed, trial, substream, point, index >> np.uint64(1))
    return np.where((index & np.uint64(1)) == 0, a, b)
