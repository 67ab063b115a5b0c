"""Parameter sweeps behind the rate-loss and gap-to-capacity curves.

Both sweeps return rows as dataclasses; the ``write_*`` helpers turn them into
CSV with a fixed header.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import IO, Iterable, List, Optional, Sequence

from ..codecs import find_cc_composition
from ..errors import InfeasibleError
from ..trellis import AmplitudeAlphabet, ForwardTrellis, build_forward_trellis
from .bmd import WachsmannPoint
from .metrics import rate_loss

RATE_LOSS_HEADER = ("N", "rate_loss_sphere", "rate_loss_shell", "rate_loss_cc")
WACHSMANN_HEADER = ("Hx", "delta_snr_db", "code_rate", "gamma")


def iroot_ceil(x: int, q: int) -> int:
    """Smallest integer r with r**q >= x, for x >= 0."""
    if x < 0 or q < 1:
        raise ValueError("need x >= 0 and q >= 1")
    if x < 2:
        return x
    r = 1 << -(-x.bit_length() // q)  # r**q >= x
    while True:
        s = ((q - 1) * r + x // r ** (q - 1)) // q
        if s >= r:
            break
        r = s
    # r is now floor(x ** (1/q))
    return r if r**q >= x else r + 1


def min_codebook_size(N: int, Rs: float) -> int:
    """Smallest integer K with K >= 2**(N Rs), computed exactly for decimal Rs."""
    from fractions import Fraction

    frac = Fraction(str(Rs)) * N
    return iroot_ceil(1 << frac.numerator, frac.denominator)


@dataclass(frozen=True)
class CodeChoice:
    """One minimal code of a sweep row: its size and total energy per block."""

    size: int
    energy: float  # mean energy per N-sequence
    param: object  # Emax, shell energy or composition counts

    def rate(self, N: int) -> float:
        return math.log2(self.size) / N if self.size > 1 else 0.0


def sphere_for_size(ft: ForwardTrellis, target: int) -> Optional[CodeChoice]:
    """Smallest sphere (all shells up to some radius) holding ``target`` sequences."""
    total, energy = 0, 0
    for l, c in enumerate(ft.shell_counts):
        total += c
        energy += c * ft.shell_energy(l)
        if total >= target:
            return CodeChoice(total, energy / total, ft.shell_energy(l))
    return None


def shell_for_size(ft: ForwardTrellis, target: int) -> Optional[CodeChoice]:
    """Smallest-radius single shell that alone holds ``target`` sequences."""
    for l, c in enumerate(ft.shell_counts):
        if c >= target:
            return CodeChoice(c, float(ft.shell_energy(l)), ft.shell_energy(l))
    return None


def cc_for_size(alphabet: AmplitudeAlphabet, N: int, target: int) -> Optional[CodeChoice]:
    k = target.bit_length() - 1
    try:
        comp = find_cc_composition(alphabet, N, k, min_size=target)
    except InfeasibleError:
        return None
    return CodeChoice(comp.size, float(comp.energy), comp.counts)


@dataclass(frozen=True)
class RateLossRow:
    N: int
    rate_loss_sphere: float
    rate_loss_shell: float
    rate_loss_cc: float
    sphere: CodeChoice
    shell: CodeChoice
    cc: CodeChoice


def _loss(choice: CodeChoice, N: int, alphabet: AmplitudeAlphabet) -> float:
    return rate_loss(choice.rate(N), choice.energy / N, alphabet)


def rate_loss_row(m: int, Rs: float, N: int) -> RateLossRow:
    """Rate losses of the three minimal codes at block length ``N``.

    Each code is the least-energy one of its family holding at least
    ``2**(N Rs)`` sequences; rate losses use the codes' actual rates.
    """
    alphabet = AmplitudeAlphabet(m)
    target = min_codebook_size(N, Rs)
    if target > alphabet.size**N:
        raise InfeasibleError(f"rate {Rs} exceeds log2|A| = {alphabet.m - 1}")
    ft = build_forward_trellis(alphabet, N, N * alphabet.amplitudes[-1] ** 2)
    sphere = sphere_for_size(ft, target)
    shell = shell_for_size(ft, target)
    cc = cc_for_size(alphabet, N, target)
    missing = [n for n, c in (("sphere", sphere), ("shell", shell), ("cc", cc)) if c is None]
    if missing:
        raise InfeasibleError(f"N={N}: no {', '.join(missing)} code reaches 2**{N * Rs:g}")
    return RateLossRow(
        N,
        _loss(sphere, N, alphabet),
        _loss(shell, N, alphabet),
        _loss(cc, N, alphabet),
        sphere,
        shell,
        cc,
    )


def rate_loss_sweep(m: int, Rs: float, N_values: Iterable[int], notes: Optional[list] = None) -> List[RateLossRow]:
    """Rows for every feasible N; infeasible ones are skipped and noted."""
    rows = []
    for N in N_values:
        try:
            rows.append(rate_loss_row(m, Rs, int(N)))
        except InfeasibleError as exc:
            if notes is not None:
                notes.append(str(exc))
    return rows


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


def write_rate_loss_csv(rows: Sequence[RateLossRow], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(RATE_LOSS_HEADER)
    for r in rows:
        w.writerow([r.N, _fmt(r.rate_loss_sphere), _fmt(r.rate_loss_shell), _fmt(r.rate_loss_cc)])


def write_wachsmann_csv(points: Sequence[WachsmannPoint], fh: IO[str]) -> None:
    """Unbounded gaps are written as ``inf``."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(WACHSMANN_HEADER)
    for p in points:
        w.writerow([_fmt(p.Hx), _fmt(p.delta_snr), _fmt(p.code_rate), _fmt(p.gamma)])
