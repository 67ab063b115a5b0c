"""Binary reflected Gray code labeling of 2**m-ASK.

Points are ordered from -(2**m - 1) to 2**m - 1. The label of point ``i`` is
``i ^ (i >> 1)``; its most significant bit is the sign bit B1 (1 for positive
points) and the remaining m-1 bits B2..Bm depend only on the amplitude.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Tuple

import numpy as np


def ask_points(m: int) -> np.ndarray:
    """Constellation points of 2**m-ASK in increasing order."""
    return np.arange(-(2**m) + 1, 2**m, 2, dtype=np.int64)


@lru_cache(maxsize=None)
def _labels(m: int) -> np.ndarray:
    idx = np.arange(2**m)
    gray = idx ^ (idx >> 1)
    bits = (gray[:, None] >> np.arange(m - 1, -1, -1)[None, :]) & 1
    bits = bits.astype(np.int8)
    bits.setflags(write=False)
    return bits


def brgc_labels(m: int) -> np.ndarray:
    """(2**m, m) array of label bits; column 0 is B1 (the sign bit)."""
    return _labels(m)


def amplitude_bits(m: int) -> np.ndarray:
    """(2**(m-1), m-1) array: bits B2..Bm of amplitude 2j+1 in row j."""
    return _labels(m)[2 ** (m - 1):, 1:]


@lru_cache(maxsize=None)
def _amp_lookup(m: int) -> dict:
    return {tuple(int(b) for b in row): 2 * j + 1 for j, row in enumerate(amplitude_bits(m))}


def amplitude_from_bits(m: int, bits: Tuple[int, ...]) -> int:
    return _amp_lookup(m)[tuple(bits)]


def amplitude_index_from_bits(m: int, bits: np.ndarray) -> np.ndarray:
    """Vectorised inverse of :func:`amplitude_bits` over the last axis."""
    table = np.full(2 ** (m - 1), -1, dtype=np.int64)
    w = 1 << np.arange(m - 2, -1, -1)
    for j, row in enumerate(amplitude_bits(m)):
        table[int(row @ w)] = j
    return table[bits.astype(np.int64) @ w]
