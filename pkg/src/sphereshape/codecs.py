"""Index <-> amplitude-sequence mappings.

* ESS: lexicographic enumeration of all sequences inside the energy sphere.
* Laroia's first algorithm: shell (energy) order, lexicographic within a shell.
* Constant composition: lexicographic ranking of one composition's permutations.

Indices are plain Python integers throughout; bit blocks are big-endian.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import gammaln

from .errors import (
    EmptyCodebookError,
    IndexRangeError,
    InfeasibleError,
    InvalidSequenceError,
)
from .trellis import (
    AmplitudeAlphabet,
    EnergyTrellis,
    ForwardTrellis,
    prefix_energy_sum,
)

__all__ = [
    "Composition",
    "ShapedCodeSummary",
    "input_length",
    "ess_encode",
    "ess_decode",
    "laroia_encode",
    "laroia_decode",
    "cc_rate",
    "cc_encode",
    "cc_decode",
    "multinomial",
    "mb_composition",
    "find_cc_composition",
    "operational_energy",
    "summarize",
    "index_to_bits",
    "bits_to_index",
]


def input_length(size: int) -> int:
    """Number of input bits k = floor(log2 size) a codebook of ``size`` supports."""
    if size < 1:
        raise EmptyCodebookError("codebook is empty")
    return size.bit_length() - 1


def index_to_bits(index: int, k: int) -> List[int]:
    if index < 0 or index >> k:
        raise IndexRangeError(f"index {index} does not fit in {k} bits")
    return [(index >> (k - 1 - j)) & 1 for j in range(k)]


def bits_to_index(bits: Iterable[int]) -> int:
    index = 0
    for b in bits:
        index = (index << 1) | (int(b) & 1)
    return index


# --------------------------------------------------------------------------
# Enumerative sphere shaping


def ess_encode(trellis: EnergyTrellis, index: int) -> Tuple[int, ...]:
    """Sequence with lexicographic rank ``index`` in the trellis codebook."""
    if not 0 <= index < trellis.size:
        raise IndexRangeError(f"index {index} outside [0, {trellis.size})")
    T, L = trellis.counts, trellis.L
    amps = trellis.alphabet.amplitudes
    steps = trellis.steps
    out = []
    l = 0
    i = index
    for n in range(trellis.N):
        col = T[n + 1]
        for a, d in zip(amps, steps):
            if l + d >= L:
                raise IndexRangeError("index exceeds subtree size")  # pragma: no cover
            t = col[l + d]
            if i < t:
                out.append(a)
                l += d
                break
            i -= t
    return tuple(out)


def ess_decode(trellis: EnergyTrellis, seq: Sequence[int]) -> int:
    """Lexicographic rank of ``seq`` (Cover's enumeration over the trellis)."""
    N, L = trellis.N, trellis.L
    if len(seq) != N:
        raise InvalidSequenceError(f"expected {N} amplitudes, got {len(seq)}")
    T = trellis.counts
    alphabet = trellis.alphabet
    branches = tuple(zip(alphabet.amplitudes, trellis.steps))
    steps = dict(branches)
    parts = []
    nodes = []
    l = 0
    for n, a in enumerate(seq):
        if a not in steps:
            raise InvalidSequenceError(f"amplitude {a!r} at position {n} not in {alphabet.amplitudes}")
        col = T[n + 1]
        lower = 0
        for b, d in branches:
            if b >= a or l + d >= L:
                break
            lower += col[l + d]
        l += steps[a]
        if l >= L:
            raise InvalidSequenceError(f"sequence energy exceeds Emax={trellis.Emax}")
        parts.append(lower)
        nodes.append(col[l])
    # the rank inside each visited subtree must be below that subtree's count;
    # fails for sequences cut from a trimmed or bounded-precision codebook
    local = 0
    for n in range(N - 1, -1, -1):
        if local >= nodes[n]:
            raise InvalidSequenceError("sequence is not in this codebook")
        local += parts[n]
    if local >= trellis.size:
        raise InvalidSequenceError("sequence is not in this codebook")
    return local


# --------------------------------------------------------------------------
# Laroia's first algorithm (energy-ordered)


def _shell_completions(ft: ForwardTrellis, remaining: int, energy: int) -> int:
    # number of `remaining`-sequences with energy exactly `energy`
    if remaining == 0:
        return 1 if energy == 0 else 0
    return ft.count(remaining, energy)


def laroia_encode(ft: ForwardTrellis, index: int) -> Tuple[int, ...]:
    """Sequence at position ``index`` in energy-then-lexicographic order."""
    if not 0 <= index < ft.size:
        raise IndexRangeError(f"index {index} outside [0, {ft.size})")
    i = index
    shells = ft.shell_counts
    for l, c in enumerate(shells):
        if i < c:
            break
        i -= c
    energy = ft.shell_energy(l)
    N = ft.N
    out = []
    for n in range(N):
        for a in ft.alphabet.amplitudes:
            rest = energy - a * a
            if rest < 0:
                raise IndexRangeError("index exceeds shell size")  # pragma: no cover
            c = _shell_completions(ft, N - n - 1, rest)
            if i < c:
                out.append(a)
                energy = rest
                break
            i -= c
    return tuple(out)


def laroia_decode(ft: ForwardTrellis, seq: Sequence[int]) -> int:
    N = ft.N
    if len(seq) != N:
        raise InvalidSequenceError(f"expected {N} amplitudes, got {len(seq)}")
    for n, a in enumerate(seq):
        if a not in ft.alphabet:
            raise InvalidSequenceError(f"amplitude {a!r} at position {n} not in alphabet")
    energy = sum(a * a for a in seq)
    l = (energy - N) // 8
    if l >= ft.L:
        raise InvalidSequenceError(f"sequence energy {energy} exceeds Emax={ft.Emax}")
    index = sum(ft.shell_counts[:l])
    rem = energy
    for n, a in enumerate(seq):
        for b in ft.alphabet.amplitudes:
            if b >= a:
                break
            if rem - b * b >= 0:
                index += _shell_completions(ft, N - n - 1, rem - b * b)
        rem -= a * a
    return index


# --------------------------------------------------------------------------
# Constant composition


@dataclass(frozen=True)
class Composition:
    """Occurrence counts, aligned with ``amplitudes``."""

    amplitudes: Tuple[int, ...]
    counts: Tuple[int, ...]

    def __post_init__(self):
        if len(self.amplitudes) != len(self.counts):
            raise ValueError("amplitudes and counts differ in length")
        if any(c < 0 for c in self.counts):
            raise ValueError("counts must be non-negative")
        if list(self.amplitudes) != sorted(set(self.amplitudes)):
            raise ValueError("amplitudes must be strictly increasing")

    @classmethod
    def from_mapping(cls, counts: Mapping[int, int]) -> "Composition":
        amps = tuple(sorted(counts))
        return cls(amps, tuple(int(counts[a]) for a in amps))

    @classmethod
    def of(cls, alphabet: AmplitudeAlphabet, counts: Sequence[int]) -> "Composition":
        return cls(alphabet.amplitudes, tuple(int(c) for c in counts))

    @property
    def N(self) -> int:
        return sum(self.counts)

    @property
    def energy(self) -> int:
        """Energy of every sequence in the code: sum_a #(a) a^2."""
        return sum(c * a * a for a, c in zip(self.amplitudes, self.counts))

    @property
    def size(self) -> int:
        return multinomial(self.counts)

    def as_dict(self) -> Dict[int, int]:
        return dict(zip(self.amplitudes, self.counts))


def multinomial(counts: Sequence[int]) -> int:
    """N! / prod(c!) as an exact integer."""
    result = 1
    total = 0
    for c in counts:
        for j in range(1, c + 1):
            total += 1
            result = result * total // j
    return result


def cc_rate(composition: Composition) -> float:
    """Shaping rate log2(multinomial) / N of a constant-composition code."""
    size = composition.size
    return math.log2(size) / composition.N if composition.N else 0.0


def cc_encode(composition: Composition, index: int) -> Tuple[int, ...]:
    total = composition.size
    if not 0 <= index < total:
        raise IndexRangeError(f"index {index} outside [0, {total})")
    counts = list(composition.counts)
    amps = composition.amplitudes
    remaining = composition.N
    out = []
    i = index
    while remaining:
        for j, a in enumerate(amps):
            c = counts[j]
            if c == 0:
                continue
            # permutations of the rest once `a` is placed here
            sub = total * c // remaining
            if i < sub:
                out.append(a)
                counts[j] -= 1
                total = sub
                break
            i -= sub
        remaining -= 1
    return tuple(out)


def cc_decode(composition: Composition, seq: Sequence[int]) -> int:
    amps = composition.amplitudes
    pos = {a: j for j, a in enumerate(amps)}
    if len(seq) != composition.N:
        raise InvalidSequenceError(f"expected {composition.N} amplitudes, got {len(seq)}")
    seen = [0] * len(amps)
    for a in seq:
        if a not in pos:
            raise InvalidSequenceError(f"amplitude {a!r} not in composition alphabet")
        seen[pos[a]] += 1
    if tuple(seen) != composition.counts:
        raise InvalidSequenceError("sequence composition does not match")
    counts = list(composition.counts)
    total = composition.size
    remaining = composition.N
    index = 0
    for a in seq:
        ja = pos[a]
        for j in range(ja):
            if counts[j]:
                index += total * counts[j] // remaining
        total = total * counts[ja] // remaining
        counts[ja] -= 1
        remaining -= 1
    return index


def mb_composition(N: int, pmf: Mapping[int, float]) -> Composition:
    """Round N * P(a) to integer counts summing to N (largest remainder).

    Ties in the fractional parts go to the smaller amplitude.
    """
    amps = sorted(pmf)
    probs = [Fraction(pmf[a]).limit_denominator(10**12) if not isinstance(pmf[a], Fraction) else pmf[a] for a in amps]
    total = sum(probs)
    scaled = [p * N / total for p in probs]
    floors = [math.floor(s) for s in scaled]
    short = N - sum(floors)
    order = sorted(range(len(amps)), key=lambda j: (-(scaled[j] - floors[j]), amps[j]))
    for j in order[:short]:
        floors[j] += 1
    return Composition(tuple(amps), tuple(floors))


def _all_compositions(N: int, K: int) -> np.ndarray:
    """Every K-part composition of N as rows of an int32 array."""
    if K == 1:
        return np.array([[N]], dtype=np.int32)
    blocks = []
    for c in range(N + 1):
        rest = _compositions_cached(N - c, K - 1)
        blocks.append(np.column_stack([np.full(len(rest), c, dtype=np.int32), rest]))
    return np.concatenate(blocks)


@lru_cache(maxsize=4096)
def _compositions_cached(N: int, K: int) -> np.ndarray:
    return _all_compositions(N, K)


_EXHAUSTIVE_LIMIT = 4_000_000


def _num_compositions(N: int, K: int) -> int:
    return math.comb(N + K - 1, K - 1)


def find_cc_composition(
    alphabet: AmplitudeAlphabet,
    N: int,
    k: int,
    method: str = "auto",
    min_size: Optional[int] = None,
) -> Composition:
    """Least-energy composition whose code holds at least ``2**k`` sequences.

    ``method="exhaustive"`` scans every composition (used automatically while
    there are at most a few million); ``"greedy"`` is a heuristic: a
    steepest-ascent walk in rate per unit energy from the all-ones composition,
    followed by local refinement with exchanges of up to two counts. Among
    equal-energy optima the larger code wins. ``min_size`` replaces the
    ``2**k`` threshold when given.
    """
    K = alphabet.size
    target = (1 << k) if min_size is None else int(min_size)
    if k < 0 or target > alphabet.size**N:
        raise InfeasibleError(f"no length-{N} composition code holds {target} sequences")
    if target <= 1:
        return Composition.of(alphabet, [N] + [0] * (K - 1))
    if method == "auto":
        method = "exhaustive" if _num_compositions(N, K) <= _EXHAUSTIVE_LIMIT else "greedy"
    if method == "exhaustive":
        return _cc_exhaustive(alphabet, N, target)
    if method == "greedy":
        return _cc_greedy(alphabet, N, target)
    raise ValueError(f"unknown method {method!r}")


def _log2_multinomial(comps: np.ndarray) -> np.ndarray:
    N = comps.sum(axis=-1)
    return (gammaln(N + 1) - gammaln(comps + 1).sum(axis=-1)) / math.log(2)


def _cc_exhaustive(alphabet: AmplitudeAlphabet, N: int, target: int) -> Composition:
    comps = _all_compositions(N, alphabet.size)
    sq = np.array([a * a for a in alphabet.amplitudes], dtype=np.int64)
    lg = _log2_multinomial(comps)
    ok = lg >= _log2_int(target) - 1e-6
    if not ok.any():
        raise InfeasibleError(f"no composition of length {N} reaches {target} sequences")
    cand = comps[ok]
    energy = cand.astype(np.int64) @ sq
    order = np.lexsort((-lg[ok], energy))
    for j in order:
        counts = tuple(int(c) for c in cand[j])
        if multinomial(counts) >= target:
            return Composition(alphabet.amplitudes, counts)
    raise InfeasibleError(f"no composition of length {N} reaches {target} sequences")


def _log2_int(x: int) -> float:
    shift = max(0, x.bit_length() - 60)
    return math.log2(x >> shift) + shift


def _cc_greedy(alphabet: AmplitudeAlphabet, N: int, target: int) -> Composition:
    amps = alphabet.amplitudes
    K = len(amps)
    sq = [a * a for a in amps]
    counts = [N] + [0] * (K - 1)

    def lg(c):
        return _log2_multinomial(np.array(c, dtype=np.int64))

    def energy(c):
        return sum(x * s for x, s in zip(c, sq))

    while multinomial(counts) < target:
        base = lg(counts)
        best, best_score = None, -math.inf
        for i in range(K):
            if counts[i] == 0:
                continue
            for j in range(i + 1, K):
                trial = counts.copy()
                trial[i] -= 1
                trial[j] += 1
                gain = lg(trial) - base
                if gain <= 0:
                    continue
                score = gain / (sq[j] - sq[i])
                if score > best_score:
                    best, best_score = trial, score
        if best is None:
            raise InfeasibleError(f"greedy search cannot reach {target} sequences")
        counts = best

    moves = []
    for i in range(K):
        for j in range(K):
            if i != j:
                moves.append(((i, j),))
    pair_moves = [(m1[0], m2[0]) for m1 in moves for m2 in moves]
    improved = True
    while improved:
        improved = False
        cur_e, cur_size = energy(counts), multinomial(counts)
        for mv in moves + pair_moves:
            trial = counts.copy()
            for i, j in mv:
                trial[i] -= 1
                trial[j] += 1
            if min(trial) < 0:
                continue
            e = energy(trial)
            if e > cur_e:
                continue
            size = multinomial(trial)
            if size >= target and (e < cur_e or size > cur_size):
                counts = trial
                improved = True
                break
    return Composition(amps, tuple(counts))


# --------------------------------------------------------------------------
# Operational energy and summaries


@dataclass(frozen=True)
class OperationalEnergy:
    mean: float
    half_width: float  # 95% confidence half-width; 0 for exact results
    method: str


Codec = Union[EnergyTrellis, ForwardTrellis, Composition]


def operational_energy(
    codec: Codec,
    k: Optional[int] = None,
    mode: str = "auto",
    samples: int = 20000,
    rng: Optional[np.random.Generator] = None,
) -> OperationalEnergy:
    """Mean sequence energy over the indices ``0 .. 2**k - 1`` actually used.

    ``mode``: ``"exact"`` (closed form over the trellis), ``"enumerate"``
    (encode every used index), ``"montecarlo"`` (uniform random indices) or
    ``"auto"`` (enumerate for ``2**k <= 2**20``, exact otherwise).
    """
    size = codec.size
    if k is None:
        k = input_length(size)
    used = 1 << k
    if used > size:
        raise IndexRangeError(f"codebook of {size} sequences cannot carry {k} bits")
    if isinstance(codec, Composition):
        return OperationalEnergy(float(codec.energy), 0.0, "exact")
    if mode == "auto":
        mode = "enumerate" if k <= 20 else "exact"
    encode = ess_encode if isinstance(codec, EnergyTrellis) else laroia_encode
    if mode == "enumerate":
        total = 0
        for i in range(used):
            total += sum(a * a for a in encode(codec, i))
        return OperationalEnergy(total / used, 0.0, "enumerate")
    if mode == "exact":
        if isinstance(codec, EnergyTrellis):
            return OperationalEnergy(float(Fraction(prefix_energy_sum(codec, used), used)), 0.0, "exact")
        total, left = 0, used
        for l, c in enumerate(codec.shell_counts):
            take = min(left, c)
            total += take * codec.shell_energy(l)
            left -= take
            if not left:
                break
        return OperationalEnergy(total / used, 0.0, "exact")
    if mode == "montecarlo":
        rng = rng if rng is not None else np.random.default_rng()
        energies = np.empty(samples)
        for s in range(samples):
            i = _uniform_index(rng, k)
            energies[s] = sum(a * a for a in encode(codec, i))
        half = 1.96 * energies.std(ddof=1) / math.sqrt(samples)
        return OperationalEnergy(float(energies.mean()), float(half), "montecarlo")
    raise ValueError(f"unknown mode {mode!r}")


def _uniform_index(rng: np.random.Generator, k: int) -> int:
    words = rng.integers(0, 1 << 32, size=(k + 31) // 32, dtype=np.uint64)
    value = 0
    for w in words:
        value = (value << 32) | int(w)
    return value >> (32 * len(words) - k)


@dataclass(frozen=True)
class ShapedCodeSummary:
    k: int
    Rs: float
    Eav: float
    Gs: float


def summarize(trellis: EnergyTrellis) -> ShapedCodeSummary:
    """Operational figures of an ESS codebook: k, k/N, E_av and shaping gain."""
    from .analysis.metrics import shaping_gain
    from .trellis import average_energy

    k = input_length(trellis.size)
    Eav = average_energy(trellis)
    Rs = k / trellis.N
    return ShapedCodeSummary(k, Rs, Eav, shaping_gain(Rs, Eav, trellis.N))
