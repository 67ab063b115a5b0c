"""Bounded-energy amplitude trellis.

Node ``(n, e)`` counts the number of ways to complete an amplitude prefix of
length ``n`` and energy ``e`` into a full ``N``-sequence whose energy does not
exceed ``Emax``. Because all amplitudes are odd, every reachable energy in
column ``n`` has the form ``n + 8*l``; counts are stored densely per level
``l = 0..L-1``.

Counts are exact Python integers. In bounded-precision mode each sum is
rounded down to ``n_m`` significant bits before it is stored, so every stored
count is ``mantissa * 2**exponent``.
"""
from __future__ import annotations

import math
from functools import lru_cache
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import IO, Dict, FrozenSet, List, Optional, Sequence, Tuple

from .errors import (
    CannotTrimError,
    InvalidBoundError,
    PrecisionConfigError,
    ShapingError,
)

__all__ = [
    "AmplitudeAlphabet",
    "BPCount",
    "Precision",
    "FULL",
    "EnergyTrellis",
    "ForwardTrellis",
    "ApproximationWarning",
    "num_levels",
    "build_trellis",
    "build_forward_trellis",
    "sequence_count",
    "amplitude_distribution",
    "average_energy",
    "prefix_energy_sum",
    "trim_top_level",
    "storage_bound",
    "trellis_storage_bound",
    "trellis_params",
    "trellis_from_params",
    "dump_counts",
]


class ApproximationWarning(UserWarning):
    """A quantity derived from a bounded-precision trellis is approximate."""


@lru_cache(maxsize=None)
def _amplitudes(m: int) -> Tuple[int, ...]:
    return tuple(range(1, 2**m, 2))


@dataclass(frozen=True)
class AmplitudeAlphabet:
    """Positive half {1, 3, ..., 2**m - 1} of a 2**m-ASK constellation."""

    m: int

    def __post_init__(self):
        if not isinstance(self.m, int) or self.m < 2:
            raise ValueError(f"m must be an integer >= 2, got {self.m!r}")

    @property
    def amplitudes(self) -> Tuple[int, ...]:
        return _amplitudes(self.m)

    @property
    def size(self) -> int:
        return 2 ** (self.m - 1)

    def __len__(self):
        return self.size

    def __iter__(self):
        return iter(self.amplitudes)

    def __contains__(self, a) -> bool:
        return isinstance(a, int) and 1 <= a < 2**self.m and a % 2 == 1

    @classmethod
    def from_amplitudes(cls, amplitudes: Sequence[int]) -> "AmplitudeAlphabet":
        amps = list(amplitudes)
        m = len(amps).bit_length()
        if len(amps) < 2 or 2 ** (m - 1) != len(amps) or amps != list(range(1, 2**m, 2)):
            raise ValueError(
                "alphabet must be exactly the odd integers 1..2**m-1 in increasing order"
            )
        return cls(m)


@dataclass(frozen=True)
class BPCount:
    """Bounded-precision count ``mantissa * 2**exponent``."""

    mantissa: int
    exponent: int

    @property
    def value(self) -> int:
        return self.mantissa << self.exponent

    @classmethod
    def round_down(cls, value: int, n_m: int) -> "BPCount":
        p = max(0, value.bit_length() - n_m)
        return cls(value >> p, p)


@dataclass(frozen=True)
class Precision:
    """Count precision: ``full`` (exact) or ``bounded`` with n_m/n_p bit fields."""

    mode: str = "full"
    n_m: Optional[int] = None
    n_p: Optional[int] = None

    def __post_init__(self):
        if self.mode == "full":
            if self.n_m is not None or self.n_p is not None:
                raise PrecisionConfigError("full precision takes no n_m/n_p")
        elif self.mode == "bounded":
            if self.n_m is None or self.n_m < 2:
                raise PrecisionConfigError(f"n_m must be >= 2, got {self.n_m!r}")
            if self.n_p is None or self.n_p < 1:
                raise PrecisionConfigError(f"n_p must be >= 1, got {self.n_p!r}")
        else:
            raise PrecisionConfigError(f"unknown precision mode {self.mode!r}")

    @classmethod
    def bounded(cls, n_m: int, n_p: int) -> "Precision":
        return cls("bounded", n_m, n_p)

    @property
    def is_full(self) -> bool:
        return self.mode == "full"

    def __str__(self):
        return "full" if self.is_full else f"bounded({self.n_m},{self.n_p})"


FULL = Precision()


def num_levels(N: int, Emax: int) -> int:
    """Number of energy levels in the final trellis column."""
    if N < 1:
        raise ValueError(f"block length must be >= 1, got {N}")
    if Emax < N:
        raise InvalidBoundError(f"Emax={Emax} < N={N}: no sequence fits")
    return (Emax - N) // 8 + 1


@lru_cache(maxsize=None)
def _level_steps(alphabet: AmplitudeAlphabet) -> Tuple[int, ...]:
    # level offset of each branch: (a*a - 1) / 8 is integral for odd a
    return tuple((a * a - 1) // 8 for a in alphabet.amplitudes)


@dataclass(frozen=True, eq=False)
class EnergyTrellis:
    alphabet: AmplitudeAlphabet
    N: int
    Emax: int
    precision: Precision
    counts: Tuple[Tuple[int, ...], ...] = field(repr=False)
    removed: FrozenSet[Tuple[int, int]] = frozenset()

    @property
    def L(self) -> int:
        return len(self.counts[0])

    def level(self, n: int, e: int) -> Optional[int]:
        """Level index of energy ``e`` in column ``n``; None if not a trellis node."""
        d = e - n
        if d < 0 or d % 8:
            return None
        l = d // 8
        return l if l < self.L else None

    def count(self, n: int, e: int) -> int:
        """T_n^e, or 0 for energies outside the trellis."""
        l = self.level(n, e)
        return 0 if l is None else self.counts[n][l]

    def bp_count(self, n: int, e: int) -> BPCount:
        """Count as a mantissa/exponent pair (exponent 0 in full precision)."""
        v = self.count(n, e)
        if self.precision.is_full:
            return BPCount(v, 0)
        return BPCount.round_down(v, self.precision.n_m)

    @property
    def size(self) -> int:
        return self.counts[0][0]

    @property
    def rate(self) -> float:
        """Shaping rate log2|codebook| / N in bit/amp."""
        return math.log2(self.size) / self.N

    @property
    def k(self) -> int:
        return self.size.bit_length() - 1

    @property
    def steps(self) -> Tuple[int, ...]:
        return _level_steps(self.alphabet)


def _backward_counts(
    alphabet: AmplitudeAlphabet,
    N: int,
    L: int,
    precision: Precision,
    removed: FrozenSet[Tuple[int, int]] = frozenset(),
) -> List[List[int]]:
    steps = _level_steps(alphabet)
    counts: List[List[int]] = [[0] * L for _ in range(N + 1)]
    counts[N] = [0 if (N, l) in removed else 1 for l in range(L)]
    n_m = precision.n_m
    max_exp = None if precision.is_full else 2**precision.n_p - 1
    for n in range(N - 1, -1, -1):
        nxt = counts[n + 1]
        col = counts[n]
        for l in range(L):
            if (n, l) in removed:
                continue
            s = 0
            for d in steps:
                if l + d >= L:
                    break
                s += nxt[l + d]
            if n_m is not None and s.bit_length() > n_m:
                p = s.bit_length() - n_m
                if p > max_exp:
                    raise PrecisionConfigError(
                        f"exponent {p} at node ({n}, {n + 8 * l}) does not fit in "
                        f"{precision.n_p} bits"
                    )
                s = (s >> p) << p
            col[l] = s
    return counts


def build_trellis(
    alphabet: AmplitudeAlphabet,
    N: int,
    Emax: int,
    precision: Precision = FULL,
) -> EnergyTrellis:
    """Build the bounded-energy trellis for sequences of length N and energy <= Emax."""
    L = num_levels(N, Emax)
    counts = _backward_counts(alphabet, N, L, precision)
    return EnergyTrellis(alphabet, N, Emax, precision, tuple(map(tuple, counts)))


def sequence_count(trellis: EnergyTrellis) -> int:
    return trellis.size


def amplitude_distribution(trellis: EnergyTrellis) -> Dict[int, Fraction]:
    """Marginal amplitude PMF of the codebook, P(a) = T_1^{a^2} / sum_b T_1^{b^2}.

    Exact for full-precision trellises. For bounded precision the same ratio is
    returned but an :class:`ApproximationWarning` is emitted.
    """
    if not trellis.precision.is_full:
        warnings.warn(
            "amplitude distribution of a bounded-precision trellis is approximate",
            ApproximationWarning,
            stacklevel=2,
        )
    weights = {a: trellis.count(1, a * a) for a in trellis.alphabet}
    total = sum(weights.values())
    return {a: Fraction(w, total) for a, w in weights.items()}


def _suffix_sums(trellis: EnergyTrellis) -> List[List[int]]:
    """Total suffix energy over the sequences each node actually encodes.

    ``S[n][l]`` is the sum, over the ``T_n^e`` completions the encoder can
    emit from node ``(n, e)``, of the energy of positions ``n+1..N``. In
    bounded precision the last child used by a node may only be partly
    covered, so that child contributes a prefix sum instead of its full sum.
    """
    cached = getattr(trellis, "_suffix_cache", None)
    if cached is not None:
        return cached
    N, L, steps = trellis.N, trellis.L, trellis.steps
    sq = [a * a for a in trellis.alphabet]
    T = trellis.counts
    S = [[0] * L for _ in range(N + 1)]
    for n in range(N - 1, -1, -1):
        for l in range(L):
            c = T[n][l]
            if c == 0:
                continue
            S[n][l] = _walk_prefix(T, S, steps, sq, n, l, c, L)
    object.__setattr__(trellis, "_suffix_cache", S)
    return S


def _walk_prefix(T, S, steps, sq, n, l, c, L) -> int:
    # energy of positions n+1..N summed over the first c completions of (n, l);
    # requires S filled for columns > n
    N = len(T) - 1
    total = 0
    acc = 0  # energy accumulated along the walk, relative to node (n, l)
    while c > 0 and n < N:
        descended = False
        for d, a2 in zip(steps, sq):
            if l + d >= L:
                break
            t = T[n + 1][l + d]
            if c >= t:
                total += t * (acc + a2) + S[n + 1][l + d]
                c -= t
                if c == 0:
                    break
            else:
                acc += a2
                l += d
                descended = True
                break
        if c == 0:
            break
        if not descended:
            raise ShapingError("prefix count exceeds subtree size")
        n += 1
        if n == N:
            total += c * acc
    return total


def prefix_energy_sum(trellis: EnergyTrellis, limit: int) -> int:
    """Exact total energy of the sequences with ESS index < ``limit``."""
    if limit < 0 or limit > trellis.size:
        raise ValueError(f"limit must lie in [0, {trellis.size}], got {limit}")
    if limit == 0:
        return 0
    S = _suffix_sums(trellis)
    sq = [a * a for a in trellis.alphabet]
    if limit == trellis.size:
        return S[0][0]
    return _walk_prefix(trellis.counts, S, trellis.steps, sq, 0, 0, limit, trellis.L)


def average_energy(trellis: EnergyTrellis) -> float:
    """Average sequence energy of the codebook.

    Full precision uses ``N * sum_a P(a) a^2``. A bounded-precision codebook is
    not described exactly by its first-column marginal, so the mean is taken
    over exactly the ``T_0^0`` sequences the encoder emits.
    """
    if trellis.precision.is_full and not trellis.removed:
        pmf = amplitude_distribution(trellis)
        return float(trellis.N * sum(p * a * a for a, p in pmf.items()))
    return float(Fraction(prefix_energy_sum(trellis, trellis.size), trellis.size))


def trim_top_level(trellis: EnergyTrellis, k: Optional[int] = None) -> EnergyTrellis:
    """Remove top-level nodes so the codebook shrinks toward ``2**k``.

    Walking columns ``n = 1..N``, the node at level ``L-1`` is deleted (with
    all its branches) whenever the codebook still holds at least ``2**k``
    sequences afterwards. A path through a top-level node can only continue
    with amplitude 1, so every removed sequence lies on the outermost shell.
    ``k`` defaults to ``floor(log2 T_0^0)``.
    """
    L = trellis.L
    if L < 2:
        raise CannotTrimError("trellis has a single energy level; nothing to trim")
    if k is None:
        k = trellis.k
    target = 1 << k
    if trellis.size < target:
        raise CannotTrimError(f"codebook already smaller than 2**{k}")
    removed = set(trellis.removed)
    counts = [list(c) for c in trellis.counts]
    for n in range(1, trellis.N + 1):
        node = (n, L - 1)
        if node in removed:
            continue
        trial = frozenset(removed | {node})
        new = _backward_counts(trellis.alphabet, trellis.N, L, trellis.precision, trial)
        if new[0][0] >= target:
            removed.add(node)
            counts = new
    return EnergyTrellis(
        trellis.alphabet,
        trellis.N,
        trellis.Emax,
        trellis.precision,
        tuple(map(tuple, counts)),
        frozenset(removed),
    )


@dataclass(frozen=True, eq=False)
class ForwardTrellis:
    """Forward counts: F_n^e is the number of n-prefixes with energy exactly e."""

    alphabet: AmplitudeAlphabet
    N: int
    Emax: int
    counts: Tuple[Tuple[int, ...], ...] = field(repr=False)

    @property
    def L(self) -> int:
        return len(self.counts[0])

    def count(self, n: int, e: int) -> int:
        d = e - n
        if d < 0 or d % 8 or d // 8 >= self.L:
            return 0
        return self.counts[n][d // 8]

    @property
    def shell_counts(self) -> Tuple[int, ...]:
        """Per-shell sequence counts, indexed by level of the final column."""
        return self.counts[self.N]

    def shell_energy(self, l: int) -> int:
        return self.N + 8 * l

    @property
    def size(self) -> int:
        return sum(self.shell_counts)


def build_forward_trellis(alphabet: AmplitudeAlphabet, N: int, Emax: int) -> ForwardTrellis:
    L = num_levels(N, Emax)
    steps = _level_steps(alphabet)
    counts = [[0] * L for _ in range(N + 1)]
    # column 0 holds only the zero-energy node; store it at level 0 for
    # uniform indexing (energy 0 = 0 + 8*0)
    counts[0][0] = 1
    for n in range(1, N + 1):
        prev, col = counts[n - 1], counts[n]
        for l in range(L):
            s = 0
            for d in steps:
                if d > l:
                    break
                s += prev[l - d]
            col[l] = s
    return ForwardTrellis(alphabet, N, Emax, tuple(map(tuple, counts)))


def storage_bound(
    N: int,
    Emax: int,
    Rs: float,
    precision: Precision = FULL,
    shell_mapping: bool = False,
) -> int:
    """Upper bound in bits on trellis storage.

    ``L (N+1) ceil(N Rs)`` for full precision, ``L (N+1) (n_m + n_p)`` for
    bounded precision; shell mapping keeps ``log2 N + 1`` columns instead of
    ``N + 1``.
    """
    L = num_levels(N, Emax)
    columns = (math.log2(N) + 1) if shell_mapping else N + 1
    width = math.ceil(N * Rs - 1e-12) if precision.is_full else precision.n_m + precision.n_p
    bits = L * columns * width
    return int(math.ceil(bits - 1e-9))


def trellis_storage_bound(
    trellis: EnergyTrellis, precision: Optional[Precision] = None, shell_mapping: bool = False
) -> int:
    """Storage bound using the trellis' own rate; ceil(N Rs) taken exactly."""
    precision = precision or trellis.precision
    L, N = trellis.L, trellis.N
    columns = (math.log2(N) + 1) if shell_mapping else N + 1
    if precision.is_full:
        width = (trellis.size - 1).bit_length()
    else:
        width = precision.n_m + precision.n_p
    return int(math.ceil(L * columns * width - 1e-9))


def trellis_params(trellis: EnergyTrellis) -> Dict[str, object]:
    p = trellis.precision
    return {
        "m": trellis.alphabet.m,
        "N": trellis.N,
        "Emax": trellis.Emax,
        "precision": p.mode,
        "n_m": p.n_m,
        "n_p": p.n_p,
    }


def trellis_from_params(params: Dict[str, object]) -> EnergyTrellis:
    mode = params.get("precision", "full")
    precision = FULL if mode == "full" else Precision.bounded(int(params["n_m"]), int(params["n_p"]))
    return build_trellis(
        AmplitudeAlphabet(int(params["m"])), int(params["N"]), int(params["Emax"]), precision
    )


def dump_counts(trellis: EnergyTrellis, fh: IO[str]) -> None:
    """Write counts as decimal text, one column per line, levels in order."""
    for col in trellis.counts:
        fh.write(" ".join(str(c) for c in col))
        fh.write("\n")
