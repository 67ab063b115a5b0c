"""The IEEE 802.11 rate-1/2, 64-state convolutional code (generators 133, 171).

State convention: bit ``j`` of the state holds ``u[t-1-j]``, so the next state
is ``((s << 1) | u) & 63``. Arrays of several frames are shaped
``(frames, time)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Tuple, Union

import numpy as np

NUM_STATES = 64
MEMORY = 6

# taps on u[t-1..t-6] (state bits 0..5); u[t] itself feeds both outputs
_V1_TAPS = (1, 2, 4, 5)  # u[t-2], u[t-3], u[t-5], u[t-6]
_V2_TAPS = (0, 1, 2, 5)  # u[t-1], u[t-2], u[t-3], u[t-6]

# keep masks over one period, per output branch
PUNCTURE_PATTERNS: Dict[Fraction, Tuple[Tuple[int, ...], Tuple[int, ...]]] = {
    Fraction(1, 2): ((1,), (1,)),
    Fraction(2, 3): ((1, 1), (1, 0)),
    Fraction(3, 4): ((1, 1, 0), (1, 0, 1)),
    Fraction(5, 6): ((1, 1, 0, 1, 0), (1, 0, 1, 0, 1)),
}


def parse_rate(rate: Union[str, float, Fraction]) -> Fraction:
    """Code rate as a Fraction; accepts "5/6", 0.8333.. or a Fraction."""
    if isinstance(rate, str):
        r = Fraction(rate.strip())
    else:
        r = Fraction(rate).limit_denominator(12)
    if r not in PUNCTURE_PATTERNS:
        raise ValueError(f"unsupported code rate {rate}; choose from {sorted(map(str, PUNCTURE_PATTERNS))}")
    return r


def _parity(s: np.ndarray, taps) -> np.ndarray:
    acc = np.zeros_like(s)
    for j in taps:
        acc ^= (s >> j) & 1
    return acc


_STATES = np.arange(NUM_STATES, dtype=np.int64)
# OUT[s, u] = (v1, v2)
OUT1 = np.stack([_parity(_STATES, _V1_TAPS) ^ u for u in (0, 1)], axis=1).astype(np.uint8)
OUT2 = np.stack([_parity(_STATES, _V2_TAPS) ^ u for u in (0, 1)], axis=1).astype(np.uint8)
NEXT = np.stack([((_STATES << 1) | u) & 63 for u in (0, 1)], axis=1)


def conv_encode(bits, terminate: bool = False) -> Tuple[np.ndarray, np.ndarray]:
    """(v1, v2) streams for input ``bits``; six zeros are appended if ``terminate``."""
    u = np.atleast_2d(np.asarray(bits, dtype=np.uint8))
    if terminate:
        u = np.concatenate([u, np.zeros((u.shape[0], MEMORY), dtype=np.uint8)], axis=1)
    T = u.shape[1]
    padded = np.concatenate([np.zeros((u.shape[0], MEMORY), dtype=np.uint8), u], axis=1)

    def delayed(d):
        return padded[:, MEMORY - d: MEMORY - d + T]

    v1 = u ^ delayed(2) ^ delayed(3) ^ delayed(5) ^ delayed(6)
    v2 = u ^ delayed(1) ^ delayed(2) ^ delayed(3) ^ delayed(6)
    if np.ndim(bits) == 1:
        return v1[0], v2[0]
    return v1, v2


def input_select(b, state, parity: str):
    """Encoder input that forces a prescribed output bit.

    ``parity="odd"`` pins ``v2`` to ``b``, ``"even"`` pins ``v1``. Works on
    scalars or arrays of states.
    """
    s = np.asarray(state, dtype=np.int64)
    if parity == "odd":
        u = np.asarray(b) ^ _parity(s, _V2_TAPS)
    elif parity == "even":
        u = np.asarray(b) ^ _parity(s, _V1_TAPS)
    else:
        raise ValueError("parity must be 'odd' or 'even'")
    return u.astype(np.uint8) if u.ndim else int(u)


def next_state(state, u):
    return ((np.asarray(state, dtype=np.int64) << 1) | np.asarray(u, dtype=np.int64)) & 63


def keep_mask(rate: Fraction, T: int, phase: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """Boolean keep masks of length T for both branches, starting at ``phase``."""
    p1, p2 = PUNCTURE_PATTERNS[rate]
    idx = (np.arange(T) + phase) % len(p1)
    return np.array(p1, bool)[idx], np.array(p2, bool)[idx]


@dataclass(frozen=True)
class LLRFrame:
    """Depunctured LLRs, log P(0)/P(1), per time and branch; zero where punctured."""

    v1: np.ndarray
    v2: np.ndarray
    kept1: np.ndarray
    kept2: np.ndarray

    def __post_init__(self):
        if np.any(self.v1[..., ~self.kept1] != 0) or np.any(self.v2[..., ~self.kept2] != 0):
            raise ValueError("punctured positions must carry LLR 0")


# predecessor tables: for next state ns, predecessors (ns >> 1) | (x << 5)
_PRED = np.stack([(_STATES >> 1) | (x << 5) for x in (0, 1)], axis=1)
_U_OF = _STATES & 1
# branch label index 2*v1 + v2 for each (ns, x)
_BRANCH = np.stack(
    [2 * OUT1[_PRED[:, x], _U_OF] + OUT2[_PRED[:, x], _U_OF] for x in (0, 1)], axis=1
).astype(np.int64)


def viterbi_decode(frame: LLRFrame, terminate: bool = True) -> np.ndarray:
    """Max-log ML input sequence(s) for the 64-state code.

    The encoder starts in state 0; with ``terminate`` the path must also end
    there. Returns inputs shaped like the LLR arrays.
    """
    l1 = np.atleast_2d(np.asarray(frame.v1, dtype=float))
    l2 = np.atleast_2d(np.asarray(frame.v2, dtype=float))
    B, T = l1.shape
    metric = np.full((B, NUM_STATES), -np.inf)
    metric[:, 0] = 0.0
    decisions = np.empty((T, B, NUM_STATES), dtype=np.uint8)
    p0, p1 = _PRED[:, 0], _PRED[:, 1]
    br0, br1 = _BRANCH[:, 0], _BRANCH[:, 1]
    for t in range(T):
        a, b = l1[:, t:t + 1], l2[:, t:t + 1]
        # correlation metric for output pairs 00, 01, 10, 11
        bm = np.concatenate([a + b, a - b, -a + b, -a - b], axis=1)
        m0 = metric[:, p0] + bm[:, br0]
        m1 = metric[:, p1] + bm[:, br1]
        choose = m1 > m0
        decisions[t] = choose
        metric = np.where(choose, m1, m0)
        # keep metrics bounded on long frames
        metric -= metric.max(axis=1, keepdims=True)
    state = np.zeros(B, dtype=np.int64) if terminate else metric.argmax(axis=1)
    u = np.empty((B, T), dtype=np.uint8)
    rows = np.arange(B)
    for t in range(T - 1, -1, -1):
        u[:, t] = state & 1
        x = decisions[t, rows, state].astype(np.int64)
        state = (state >> 1) | (x << 5)
    return u[0] if np.ndim(frame.v1) == 1 else u
